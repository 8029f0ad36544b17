#include "fixcon/dynamics.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace fixcon;
using Catch::Matchers::WithinAbs;

TEST_CASE("rest point of a drift-free plant", "[dynamics]")
{
    const StrictFeedbackModel m({Expression{}, Expression{}}, {Expression{}, Expression{}});
    const auto dx = m.derivative(AgentState{{0.0, 0.0}}, 0.0, 0.0);
    CHECK(dx == std::vector<double>{0.0, 0.0});
}

TEST_CASE("first example follower", "[dynamics]")
{
    const auto m = builtin_model("example1_follower");
    REQUIRE(m.layers() == 2);
    const auto dx = m.derivative(AgentState{{0.0, std::numbers::pi / 2}}, 0.0, 0.0);
    CHECK_THAT(dx[0], WithinAbs(1.5707963267948966, 1e-12));
    CHECK_THAT(dx[1], WithinAbs(52.0, 1e-12));
    CHECK(m.layer_expression(0).is_zero());
    CHECK_THAT(m.disturbance(1, 1.0), WithinAbs(2.0 * std::sin(1.0) + 2.0, 1e-12));
}

TEST_CASE("second example follower 1", "[dynamics]")
{
    const auto m = builtin_model("example2_follower", 1);
    const auto dx = m.derivative(AgentState{{0.0, 1.0}}, 0.0, 0.0);
    CHECK_THAT(dx[0], WithinAbs(-0.5, 1e-12));
    CHECK_THAT(dx[1], WithinAbs(0.2701511529340699, 1e-12));
}

TEST_CASE("third example follower adds layer disturbances", "[dynamics]")
{
    const auto base = builtin_model("example2_follower", 2);
    const auto m = builtin_model("example3_follower", 2);
    const std::vector<double> x{0.3, -0.4};
    for (double t : {0.0, 0.7, 2.5}) {
        CHECK_THAT(m.layer_fn(0, x), WithinAbs(base.layer_fn(0, x), 1e-15));
        CHECK_THAT(m.layer_fn(1, x), WithinAbs(base.layer_fn(1, x), 1e-15));
        CHECK_THAT(m.disturbance(0, t), WithinAbs(std::sin(t), 1e-12));
        CHECK_THAT(m.disturbance(1, t), WithinAbs(std::cos(0.5 * t), 1e-12));
    }
}

TEST_CASE("reference signals and derivatives", "[dynamics]")
{
    const auto r = builtin_reference("example2_leader_reference");
    for (double t : {0.0, 1.3, 7.0}) {
        CHECK_THAT(r(t), WithinAbs(2.0 * std::cos(0.6 * t), 1e-12));
        CHECK_THAT(r.derivative(1, t), WithinAbs(-1.2 * std::sin(0.6 * t), 1e-12));
        CHECK_THAT(r.derivative(2, t), WithinAbs(-0.72 * std::cos(0.6 * t), 1e-12));
    }
    const auto a = builtin_reference("example1_active_reference");
    const double w = 2.0 * std::numbers::pi / 5.0;
    CHECK_THAT(a(1.1), WithinAbs(10.0 * std::sin(w * 1.1), 1e-12));
    CHECK_THAT(a.derivative(1, 1.1), WithinAbs(10.0 * w * std::cos(w * 1.1), 1e-12));
}

TEST_CASE("unknown built-in names are rejected", "[dynamics]")
{
    CHECK_THROWS(builtin_model("nope"));
    CHECK_THROWS(builtin_model("example2_follower", 5));
    CHECK_THROWS(builtin_reference("nope"));
}

TEST_CASE("layer functions may not read later states", "[dynamics]")
{
    const Expression reads_x2({Term{1.0, {Factor{FactorFn::Sin, 1}}}});
    CHECK_THROWS(StrictFeedbackModel({reads_x2, Expression{}}, {}));
}

TEST_CASE("strict-feedback causality under perturbation of later states", "[dynamics]")
{
    for (int i = 1; i <= 4; ++i) {
        const auto m = builtin_model("example3_follower", i);
        const AgentState s{{0.4, -1.1}};
        AgentState p = s;
        p.x[1] += 0.37;
        CHECK(m.derivative(s, 0.5, 1.0)[0] != m.derivative(p, 0.5, 1.0)[0]);  // x2 enters layer 1 directly
        CHECK_THAT(m.layer_fn(0, s.x), WithinAbs(m.layer_fn(0, p.x), 0.0));
    }
}

TEST_CASE("disturbance bounds: estimated and declared", "[dynamics]")
{
    const auto m = builtin_model("example3_follower", 1);
    const auto b = m.disturbance_bounds(20.0);
    CHECK_THAT(b.magnitude[0], WithinAbs(1.0, 1e-3));
    CHECK_THAT(b.magnitude[1], WithinAbs(1.0, 1e-3));
    CHECK_THAT(b.rate[0], WithinAbs(1.0, 1e-3));
    CHECK_THAT(b.rate[1], WithinAbs(0.5, 1e-3));

    const Expression d({Term{2.0, {Factor{FactorFn::Sin, 0}}}});
    const StrictFeedbackModel declared({Expression{}}, {d}, {1.0}, {});
    CHECK(declared.violated_bounds(10.0) == std::vector<std::size_t>{0});
    const StrictFeedbackModel honest({Expression{}}, {d}, {2.5}, {});
    CHECK(honest.violated_bounds(10.0).empty());
}

TEST_CASE("leader modes", "[dynamics]")
{
    LeaderSpec ref;
    ref.mode = LeaderMode::Reference;
    ref.reference = builtin_reference("example2_leader_reference");
    const auto s = ref.state_at({}, 1.0, 2);
    CHECK_THAT(s[0], WithinAbs(2.0 * std::cos(0.6), 1e-12));
    CHECK_THAT(s[1], WithinAbs(-1.2 * std::sin(0.6), 1e-12));

    LeaderSpec passive;
    passive.model = builtin_model("example1_leader");
    CHECK(passive.control(std::vector<double>{1.0, 2.0}, 0.3) == 0.0);

    // The active law cancels the known drift and tracks with PD feedback; the
    // disturbance cos t is left for the plant.
    LeaderSpec active;
    active.mode = LeaderMode::Active;
    active.model = builtin_model("example1_leader");
    active.reference = builtin_reference("example1_active_reference");
    const double t = 0.8;
    const std::vector<double> on_ref{active.reference(t), active.reference.derivative(1, t)};
    std::vector<double> dx(2);
    active.derivative(on_ref, t, dx);
    CHECK_THAT(dx[0], WithinAbs(on_ref[1], 1e-12));
    CHECK_THAT(dx[1], WithinAbs(active.reference.derivative(2, t) + std::cos(t), 1e-9));
}
