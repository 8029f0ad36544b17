#include "fixcon/topology.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace fixcon;
using Catch::Matchers::WithinAbs;

namespace {

Topology make(std::initializer_list<std::initializer_list<double>> a, std::initializer_list<double> b)
{
    const auto n = static_cast<Eigen::Index>(b.size());
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index i = 0;
    for (const auto& row : a) {
        Eigen::Index j = 0;
        for (double v : row)
            adj(i, j++) = v;
        ++i;
    }
    Eigen::VectorXd pin(n);
    i = 0;
    for (double v : b)
        pin(i++) = v;
    return Topology(adj, pin);
}

}  // namespace

TEST_CASE("single isolated follower has a zero augmented Laplacian", "[topology]")
{
    const auto bundle = build_laplacian(make({{0}}, {0}));
    CHECK(bundle.laplacian(0, 0) == 0.0);
    CHECK(bundle.ltilde(0, 0) == 0.0);
    CHECK(bundle.min_singular_value == 0.0);
}

TEST_CASE("one directed edge with the root pinned", "[topology]")
{
    const auto bundle = build_laplacian(make({{0, 0}, {1, 0}}, {1, 0}));
    Eigen::Matrix2d l, lt;
    l << 0, 0, -1, 1;
    lt << 1, 0, -1, 1;
    CHECK(bundle.laplacian.isApprox(l));
    CHECK(bundle.ltilde.isApprox(lt));
    CHECK(bundle.in_degree(0) == 1.0);
    CHECK(bundle.in_degree(1) == 1.0);
}

TEST_CASE("symmetric pair with both pinned", "[topology]")
{
    const auto bundle = build_laplacian(make({{0, 1}, {1, 0}}, {1, 1}));
    Eigen::Matrix2d lt;
    lt << 2, -1, -1, 2;
    CHECK(bundle.ltilde.isApprox(lt));
    CHECK_THAT(bundle.min_singular_value, WithinAbs(1.0, 1e-12));
}

TEST_CASE("assumption checks", "[topology]")
{
    SECTION("zero pinning fails")
    {
        const auto r = check_assumptions(make({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {0, 0, 0}));
        CHECK_FALSE(r.pinned);
        CHECK_FALSE(r.ok());
    }
    SECTION("chain from the leader passes")
    {
        const auto r = check_assumptions(make({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {1, 0, 0}));
        CHECK(r.pinned);
        CHECK(r.reachable);
        CHECK(r.invertible);
        CHECK(r.ok());
    }
    SECTION("disconnected follower is unreachable")
    {
        const auto r = check_assumptions(make({{0, 0}, {0, 0}}, {1, 0}));
        CHECK(r.pinned);
        CHECK_FALSE(r.reachable);
        REQUIRE(r.unreachable.size() == 1);
        CHECK(r.unreachable[0] == 1);
    }
}

TEST_CASE("construction rejects negative weights and self loops", "[topology]")
{
    CHECK_THROWS(make({{0, -1}, {0, 0}}, {1, 0}));
    CHECK_THROWS(make({{1, 0}, {0, 0}}, {1, 1}));
    CHECK_THROWS(make({{0, 0}, {0, 0}}, {1, -1}));
}

TEST_CASE("random graphs: zero Laplacian row sums, invertible whenever assumptions hold", "[topology]")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> w(0.0, 2.0);
    std::bernoulli_distribution edge(0.35);
    std::size_t passing = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const Eigen::Index n = 2 + trial % 6;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            b(i) = edge(rng) ? w(rng) : 0.0;
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j && edge(rng))
                    a(i, j) = w(rng);
        }
        const Topology topo(a, b);
        const auto bundle = build_laplacian(topo);
        CHECK(bundle.laplacian.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
        const auto r = check_assumptions(topo);
        if (r.pinned && r.reachable) {
            ++passing;
            CHECK(r.invertible);
            CHECK(bundle.min_singular_value > kInvertibilityTolerance);
            CHECK(std::abs(bundle.ltilde.determinant()) > 0.0);
        }
    }
    CHECK(passing > 50);
}
