#include "fixcon/topology.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace fixcon {

Topology::Topology(Eigen::MatrixXd adjacency, Eigen::VectorXd leader_weights)
    : adjacency_(std::move(adjacency)), leader_weights_(std::move(leader_weights))
{
    const auto n = adjacency_.rows();
    if (n == 0)
        throw std::invalid_argument("topology needs at least one follower");
    if (adjacency_.cols() != n)
        throw std::invalid_argument("adjacency matrix must be square");
    if (leader_weights_.size() != n)
        throw std::invalid_argument("leader weight vector length " + std::to_string(leader_weights_.size()) +
                                    " does not match " + std::to_string(n) + " followers");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (adjacency_(i, i) != 0.0)
            throw std::invalid_argument("adjacency diagonal must be zero (a_" + std::to_string(i + 1) +
                                        std::to_string(i + 1) + " != 0)");
        if (!(leader_weights_(i) >= 0.0) || !std::isfinite(leader_weights_(i)))
            throw std::invalid_argument("leader weight b_" + std::to_string(i + 1) + " must be non-negative");
        for (Eigen::Index l = 0; l < n; ++l)
            if (!(adjacency_(i, l) >= 0.0) || !std::isfinite(adjacency_(i, l)))
                throw std::invalid_argument("adjacency weight a_" + std::to_string(i + 1) + "," +
                                            std::to_string(l + 1) + " must be non-negative");
    }
}

std::vector<std::size_t> Topology::neighbors(std::size_t i) const
{
    std::vector<std::size_t> out;
    for (Eigen::Index l = 0; l < adjacency_.cols(); ++l)
        if (adjacency_(static_cast<Eigen::Index>(i), l) > 0.0)
            out.push_back(static_cast<std::size_t>(l));
    return out;
}

LaplacianBundle build_laplacian(const Topology& topology)
{
    const Eigen::MatrixXd& a = topology.adjacency();
    LaplacianBundle b;
    const Eigen::VectorXd row_sums = a.rowwise().sum();
    b.laplacian = -a;
    b.laplacian.diagonal() = row_sums;
    b.ltilde = b.laplacian;
    b.ltilde.diagonal() += topology.leader_weights();
    b.in_degree = row_sums + topology.leader_weights();
    // L~ is not symmetric for directed graphs, so use singular values.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.ltilde);
    b.min_singular_value = svd.singularValues().minCoeff();
    return b;
}

AssumptionReport check_assumptions(const Topology& topology)
{
    AssumptionReport r;
    const std::size_t n = topology.followers();
    r.pinned = topology.leader_weights().sum() > 0.0;

    // BFS from the virtual leader over edges l -> i (a_il > 0) and leader -> i (b_i > 0).
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i)
        if (topology.pinning(i) > 0.0) {
            seen[i] = true;
            queue.push_back(i);
        }
    while (!queue.empty()) {
        const std::size_t l = queue.front();
        queue.pop_front();
        for (std::size_t i = 0; i < n; ++i)
            if (!seen[i] && topology.weight(i, l) > 0.0) {
                seen[i] = true;
                queue.push_back(i);
            }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!seen[i])
            r.unreachable.push_back(i);
    r.reachable = r.unreachable.empty();

    r.min_singular_value = build_laplacian(topology).min_singular_value;
    r.invertible = r.min_singular_value > kInvertibilityTolerance;
    return r;
}

}  // namespace fixcon
