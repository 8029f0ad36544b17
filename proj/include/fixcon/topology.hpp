#pragma once

#include <Eigen/Dense>

#include <vector>

namespace fixcon {

/// Weighted directed communication graph plus leader pinning weights.
///
/// adjacency(i, l) = a_il > 0 means follower i receives the output of
/// follower l. leader_weights(i) = b_i > 0 means follower i receives the
/// leader output. Construction rejects negative weights and self loops.
class Topology {
public:
    Topology(Eigen::MatrixXd adjacency, Eigen::VectorXd leader_weights);

    std::size_t followers() const { return static_cast<std::size_t>(adjacency_.rows()); }
    const Eigen::MatrixXd& adjacency() const { return adjacency_; }
    const Eigen::VectorXd& leader_weights() const { return leader_weights_; }

    double weight(std::size_t i, std::size_t l) const { return adjacency_(i, l); }
    double pinning(std::size_t i) const { return leader_weights_(i); }

    /// Indices l with a_il > 0.
    std::vector<std::size_t> neighbors(std::size_t i) const;

private:
    Eigen::MatrixXd adjacency_;
    Eigen::VectorXd leader_weights_;
};

struct LaplacianBundle {
    Eigen::MatrixXd laplacian;  // diag(row sums) - A
    Eigen::MatrixXd ltilde;     // L + diag(b)
    Eigen::VectorXd in_degree;  // g_i = sum_l a_il + b_i
    double min_singular_value = 0.0;
};

LaplacianBundle build_laplacian(const Topology& topology);

inline constexpr double kInvertibilityTolerance = 1e-12;

struct AssumptionReport {
    bool pinned = false;       // sum b_i > 0
    bool reachable = false;    // every follower reachable from the leader
    bool invertible = false;   // smallest singular value of L~ above tolerance
    std::vector<std::size_t> unreachable;
    double min_singular_value = 0.0;

    bool ok() const { return pinned && reachable && invertible; }
};

AssumptionReport check_assumptions(const Topology& topology);

}  // namespace fixcon
