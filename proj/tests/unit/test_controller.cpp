#include "fixcon/controller.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace fixcon;
using Catch::Matchers::WithinAbs;

namespace {

StepNetworks scalar_nets()
{
    return {RbfBasis::uniform(3, -2.0, 2.0, 1.0), RbfBasis::uniform(3, -2.0, 2.0, 1.0)};
}

StepGains unit_gains(double k = 1.0)
{
    StepGains g;
    g.k = k;
    return g;
}

}  // namespace

TEST_CASE("consensus error", "[controller]")
{
    const std::vector<NeighborOutput> same{{1.0, 0.4}, {2.0, 0.4}};
    CHECK(consensus_error(0.4, same, LeaderLink{1.0, 0.4}) == 0.0);
    const std::vector<NeighborOutput> one{{1.0, 1.0}};
    CHECK_THAT(consensus_error(2.0, one, LeaderLink{1.0, 0.0}), WithinAbs(3.0, 1e-15));
    CHECK(consensus_error(1.5, {}, LeaderLink{1.0, 1.5}) == 0.0);
    CHECK_THROWS(consensus_error(1.0, {}, LeaderLink{1.0, std::nullopt}));
    CHECK_NOTHROW(consensus_error(1.0, one, LeaderLink{0.0, std::nullopt}));
}

TEST_CASE("first virtual control", "[controller]")
{
    const auto nets = scalar_nets();
    const auto w = StepWeights::zeros(3, 3);
    const Exponents ex;
    CHECK(virtual_control_step1(0.0, 0.3, w, nets, 1.0, unit_gains(), ex) == 0.0);
    CHECK_THAT(virtual_control_step1(1.0, 0.3, w, nets, 1.0, unit_gains(), ex), WithinAbs(-3.0, 1e-15));
    // -(50/2)(0.1) - (1/2)(0.1^{1/3} + 0.1^3)
    CHECK_THAT(virtual_control_step1(0.1, 0.3, w, nets, 2.0, unit_gains(50.0), ex),
               WithinAbs(-2.732579441680639, 1e-12));
}

TEST_CASE("first virtual control without power terms is linear consensus feedback", "[controller]")
{
    const auto nets = scalar_nets();
    const auto w = StepWeights::zeros(3, 3);
    StepGains g = unit_gains(7.0);
    g.k_p = g.k_q = 0.0;
    for (double e : {-2.0, -0.3, 0.0, 0.8, 5.0})
        for (double deg : {0.5, 1.0, 3.0})
            CHECK_THAT(virtual_control_step1(e, 1.0, w, nets, deg, g, Exponents{}), WithinAbs(-(7.0 / deg) * e, 1e-13));
}

TEST_CASE("first virtual control uses the actor and estimator", "[controller]")
{
    const auto nets = scalar_nets();
    StepWeights w = StepWeights::zeros(3, 3);
    w.actor << 1.0, 2.0, 3.0;
    w.theta << -1.0, 0.5, 0.25;
    w.dist = 0.7;
    const double e = 0.4, x1 = -0.9, deg = 2.0;
    const StepGains g = unit_gains(5.0);
    const double expected = -(5.0 / deg) * e - w.actor.dot(nets.critic_actor.activations(e)) / deg +
                            (-std::cbrt(e) - e * e * e - w.theta.dot(nets.theta.activations(x1)) - w.dist) / deg;
    CHECK_THAT(virtual_control_step1(e, x1, w, nets, deg, g, Exponents{}), WithinAbs(expected, 1e-13));
}

TEST_CASE("later virtual controls", "[controller]")
{
    StepNetworks nets{RbfBasis::uniform(3, -2.0, 2.0, 1.0), RbfBasis::uniform(3, -2.0, 2.0, 1.0, 12)};
    const auto w = StepWeights::zeros(3, 3);
    const std::vector<double> chi(12, 0.0);
    const Exponents ex;
    CHECK(virtual_control_stepj(0.0, w, nets, chi, 0.0, unit_gains(), ex) == 0.0);
    CHECK_THAT(virtual_control_stepj(1.0, w, nets, chi, 0.0, unit_gains(), ex), WithinAbs(-3.0, 1e-15));
    CHECK_THAT(virtual_control_stepj(0.0, w, nets, chi, 5.0, unit_gains(), ex), WithinAbs(-5.0, 1e-15));
}

TEST_CASE("truncated estimator input", "[controller]")
{
    const std::vector<StepNetworks> nets{scalar_nets(), scalar_nets()};
    CHECK(chi_dimension(1, nets) == 12);
    const std::vector<double> states{0.0, 0.0};
    const std::vector<StepWeights> prior{StepWeights::zeros(3, 3)};
    const auto chi = assemble_chi(states, prior);
    CHECK(chi.size() == 12);
    for (double v : chi)
        CHECK(v == 0.0);

    StepWeights w = StepWeights::zeros(3, 3);
    w.critic << 1, 2, 3;
    w.actor << 4, 5, 6;
    w.theta << 7, 8, 9;
    w.dist = 10;
    const std::vector<double> xs{-1.0, -2.0};
    const std::vector<StepWeights> pw{w};
    CHECK(assemble_chi(xs, pw) == std::vector<double>{-1, -2, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
}

namespace {

AgentController two_step_controller(double k = 1.0)
{
    std::vector<StepNetworks> nets{scalar_nets()};
    nets.push_back({RbfBasis::uniform(3, -2.0, 2.0, 1.0), RbfBasis::uniform(3, -2.0, 2.0, 1.0, chi_dimension(1, nets))});
    return AgentController(nets, {unit_gains(k), unit_gains(k)}, Exponents{});
}

}  // namespace

TEST_CASE("agent cascade", "[controller]")
{
    const auto ctl = two_step_controller();
    std::vector<StepWeights> weights(2, StepWeights::zeros(3, 3));

    SECTION("consensus at the origin gives zero input")
    {
        const std::vector<double> x{0.0, 0.0};
        const LocalInfo info{x, weights, {}, LeaderLink{1.0, 0.0}, 1.0};
        const auto c = ctl.control(info);
        CHECK(c.u == 0.0);
        CHECK(c.e == 0.0);
    }
    SECTION("second virtual error is x2 minus the first virtual control")
    {
        const std::vector<double> x{1.0, 0.0};
        const LocalInfo info{x, weights, {}, LeaderLink{1.0, 0.0}, 1.0};
        const auto c = ctl.control(info);
        CHECK_THAT(c.alpha[0], WithinAbs(-3.0, 1e-15));
        CHECK_THAT(c.signal[1], WithinAbs(3.0, 1e-15));
        CHECK(c.u == c.alpha[1]);
    }
    SECTION("neighbors enter only through their outputs")
    {
        const std::vector<double> x{0.2, -0.1};
        const std::vector<NeighborOutput> n1{{1.0, 0.5}};
        const std::vector<NeighborOutput> n2{{1.0, 0.5}};
        const auto a = ctl.control(LocalInfo{x, weights, n1, LeaderLink{0.0, std::nullopt}, 1.0});
        const auto b = ctl.control(LocalInfo{x, weights, n2, LeaderLink{0.0, std::nullopt}, 1.0});
        CHECK(a.u == b.u);
        CHECK_THAT(a.e, WithinAbs(-0.3, 1e-15));
    }
    SECTION("buffer-reusing evaluation matches")
    {
        const std::vector<double> x{0.7, 0.3};
        weights[0].actor << 0.1, 0.2, 0.3;
        weights[1].theta = Vector::Constant(3, 0.4);
        const LocalInfo info{x, weights, {}, LeaderLink{2.0, 0.1}, 2.0};
        Cascade reused;
        ctl.control(info, reused);
        ctl.control(info, reused);
        const auto fresh = ctl.control(info);
        CHECK(reused.u == fresh.u);
        CHECK(reused.signal == fresh.signal);
    }
    SECTION("zero in-degree is rejected")
    {
        const std::vector<double> x{0.0, 0.0};
        CHECK_THROWS(ctl.control(LocalInfo{x, weights, {}, LeaderLink{0.0, std::nullopt}, 0.0}));
    }
}

TEST_CASE("flat and structured rates agree", "[controller]")
{
    const auto ctl = two_step_controller(3.0);
    std::vector<StepWeights> weights(2, StepWeights::zeros(3, 3));
    weights[0].critic << 0.5, -0.2, 0.1;
    weights[1].actor << -0.3, 0.3, 0.9;
    weights[1].dist = 0.2;
    const std::vector<double> x{0.6, -0.4};
    const auto c = ctl.control(LocalInfo{x, weights, {}, LeaderLink{1.0, 0.0}, 1.0});
    std::vector<StepWeights> structured(2, StepWeights::zeros(3, 3));
    ctl.rates(c, weights, structured);
    std::vector<double> flat(2 * 10);
    ctl.rates(c, weights, std::span<double>(flat));
    std::size_t o = 0;
    for (const auto& r : structured) {
        for (const Vector* v : {&r.critic, &r.actor, &r.theta})
            for (Eigen::Index k = 0; k < v->size(); ++k)
                CHECK_THAT(flat[o++], WithinAbs((*v)(k), 1e-15));
        CHECK_THAT(flat[o++], WithinAbs(r.dist, 1e-15));
    }
    std::vector<double> short_buf(5);
    CHECK_THROWS(ctl.rates(c, weights, std::span<double>(short_buf)));
}
