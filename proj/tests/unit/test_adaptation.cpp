#include "fixcon/adaptation.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace fixcon;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Vector scalar(double v)
{
    return Vector::Constant(1, v);
}

StepWeights one_neuron(double wc, double wa, double theta, double dist)
{
    return StepWeights{scalar(wc), scalar(wa), scalar(theta), dist};
}

// Time for w' = -(w^{1/3} + w^3) to fall below 1e-3, by RK4 with step h.
double isolated_settling_time(double w0, double h)
{
    StepGains g;
    g.sigma_1c = 0.0;
    const Exponents ex;
    auto rate = [&](double w) { return critic_rate(one_neuron(w, 0, 0, 0), scalar(0.0), 0.0, g, ex)(0); };
    double w = w0, t = 0.0;
    while (std::abs(w) >= 1e-3) {
        const double k1 = rate(w);
        const double k2 = rate(w + 0.5 * h * k1);
        const double k3 = rate(w + 0.5 * h * k2);
        const double k4 = rate(w + h * k3);
        w += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += h;
    }
    return t;
}

}  // namespace

TEST_CASE("signed powers", "[adaptation]")
{
    CHECK_THAT(signed_pow(-8.0, 1.0 / 3.0), WithinAbs(-2.0, 1e-15));
    CHECK_THAT(signed_pow(2.0, 3.0), WithinAbs(8.0, 1e-15));
    CHECK(signed_pow(0.0, 1.0 / 3.0) == 0.0);
    CHECK_THAT(signed_pow(-2.0, 3.0), WithinAbs(-8.0, 1e-15));
}

TEST_CASE("exponent validation", "[adaptation]")
{
    CHECK_NOTHROW(check_exponents({1.0 / 3.0, 3.0}));
    CHECK_NOTHROW(check_exponents({3.0 / 5.0, 5.0 / 3.0}));
    CHECK_THROWS(check_exponents({0.5, 3.0}));   // even denominator
    CHECK_THROWS(check_exponents({1.0 / 3.0, 2.0}));
    CHECK_THROWS(check_exponents({1.0, 3.0}));
    CHECK_THROWS(check_exponents({1.0 / 3.0, 1.0}));
}

TEST_CASE("critic law", "[adaptation]")
{
    const StepGains g;
    const Exponents ex;
    CHECK(critic_rate(one_neuron(0, 0, 0, 0), scalar(0.4), 0.0, g, ex)(0) == 0.0);
    CHECK_THAT(critic_rate(one_neuron(1, 0, 0, 0), scalar(1.0), 1.0, g, ex)(0), WithinAbs(-4.0, 1e-15));
    CHECK_THAT(critic_rate(one_neuron(-1, 0, 0, 0), scalar(0.0), 5.0, g, ex)(0), WithinAbs(2.0, 1e-15));
}

TEST_CASE("actor law", "[adaptation]")
{
    const StepGains g;
    const Exponents ex;
    CHECK(actor_rate(one_neuron(0.7, 0.7, 0, 0), scalar(1.0), g, ex)(0) == 0.0);
    CHECK_THAT(actor_rate(one_neuron(0, 1, 0, 0), scalar(1.0), g, ex)(0), WithinAbs(-3.0, 1e-15));
    CHECK_THAT(actor_rate(one_neuron(0, -1, 0, 0), scalar(1.0), g, ex)(0), WithinAbs(3.0, 1e-15));
}

TEST_CASE("estimator laws", "[adaptation]")
{
    const StepGains g;
    const Exponents ex;
    CHECK(theta_rate(scalar(0.0), scalar(0.3), 0.0, g, ex)(0) == 0.0);
    CHECK_THAT(theta_rate(scalar(1.0), scalar(1.0), 2.0, g, ex)(0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(theta_rate(scalar(-0.4), scalar(0.8), -1.5, g, ex)(0),
               WithinAbs(-theta_rate(scalar(0.4), scalar(0.8), 1.5, g, ex)(0), 1e-15));

    CHECK(dist_rate(0.0, 0.0, g, ex) == 0.0);
    CHECK_THAT(dist_rate(1.0, 3.0, g, ex), WithinAbs(1.0, 1e-15));
    CHECK_THAT(dist_rate(-1.0, 0.0, g, ex), WithinAbs(2.0, 1e-15));
}

TEST_CASE("gain matrices scale every law", "[adaptation]")
{
    StepGains g;
    g.gamma_c = GainMatrix(2.5);
    Eigen::MatrixXd full(2, 2);
    full << 2.0, 0.5, 0.5, 1.0;
    g.gamma_a = GainMatrix(full);
    const Exponents ex;
    CHECK_THAT(critic_rate(one_neuron(1, 0, 0, 0), scalar(1.0), 1.0, g, ex)(0), WithinAbs(-10.0, 1e-14));

    StepWeights w{Vector::Zero(2), Vector(2), Vector::Zero(1), 0.0};
    w.actor << 1.0, -0.5;
    const Vector s = Vector::Constant(2, 0.3);
    StepGains unit;
    const Vector raw = actor_rate(w, s, unit, ex);
    CHECK((actor_rate(w, s, g, ex) - full * raw).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(g.gamma_a.positive_definite());
    CHECK_FALSE(GainMatrix(Eigen::MatrixXd(-Eigen::MatrixXd::Identity(2, 2))).positive_definite());
    CHECK_FALSE(GainMatrix(0.0).positive_definite());
}

TEST_CASE("gain validation", "[adaptation]")
{
    SECTION("compliant step")
    {
        StepGains g;
        g.k = 50;
        g.sigma_1c = 2, g.sigma_1a = 1.5;
        g.sigma_2c = 3, g.sigma_2a = 1;
        g.sigma_3c = 1376 * 2, g.sigma_3a = 1;
        g.sigma_2d = 3, g.mu_d = 1;
        CHECK(validate_gains(g, 1).clean());
    }
    SECTION("all sigma equal to one")
    {
        StepGains g;
        g.k = 50;
        const auto w = validate_gains(g, 1).warnings();
        CHECK(std::find(w.begin(), w.end(), "sigma_1") != w.end());
        CHECK(std::find(w.begin(), w.end(), "sigma_3") != w.end());
        CHECK(std::find(w.begin(), w.end(), "k") == w.end());
    }
    SECTION("small k")
    {
        StepGains g;
        g.k = 1;
        const auto w = validate_gains(g, 2).warnings();
        CHECK(std::find(w.begin(), w.end(), "k") != w.end());
    }
}

TEST_CASE("negative gains are hard errors", "[adaptation]")
{
    StepGains g;
    CHECK_NOTHROW(check_gain_signs(g));
    g.sigma_2a = -1.0;
    CHECK_THROWS(check_gain_signs(g));
    StepGains h;
    h.gamma_d = std::nan("");
    CHECK_THROWS(check_gain_signs(h));
}

TEST_CASE("every law is odd in its weight and error arguments", "[adaptation]")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    StepGains g;
    g.sigma_1c = 1.7, g.sigma_2c = 0.4, g.sigma_3c = 2.2, g.sigma_1a = 0.9, g.sigma_2a = 1.3, g.sigma_3a = 0.2;
    g.gamma_c = GainMatrix(3.0), g.gamma_a = GainMatrix(0.5), g.gamma_theta = GainMatrix(7.0), g.gamma_d = 0.3;
    const Exponents ex;
    for (int trial = 0; trial < 300; ++trial) {
        StepWeights w{Vector(3), Vector(3), Vector(3), u(rng)};
        for (int k = 0; k < 3; ++k)
            w.critic(k) = u(rng), w.actor(k) = u(rng), w.theta(k) = u(rng);
        const StepWeights neg{-w.critic, -w.actor, -w.theta, -w.dist};
        const Vector s = Vector::Random(3).cwiseAbs();
        const double z = u(rng);
        CHECK((critic_rate(w, s, z, g, ex) + critic_rate(neg, s, -z, g, ex)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((actor_rate(w, s, g, ex) + actor_rate(neg, s, g, ex)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((theta_rate(w.theta, s, z, g, ex) + theta_rate(neg.theta, s, -z, g, ex)).cwiseAbs().maxCoeff() <
              1e-12);
        CHECK(std::abs(dist_rate(w.dist, z, g, ex) + dist_rate(neg.dist, -z, g, ex)) < 1e-12);
    }
}

TEST_CASE("error-free flows shrink the weight norm monotonically", "[adaptation]")
{
    const StepGains g;
    const Exponents ex;
    const Vector s = Vector::Constant(3, 0.6);
    for (double scale : {0.1, 1.0, 10.0}) {
        StepWeights w{Vector(3), Vector::Zero(3), Vector(3), scale};
        w.critic << scale, -0.5 * scale, 0.3 * scale;
        w.theta = w.critic;
        StepWeights a = w;
        a.actor = -w.critic;
        double prev_c = w.critic.norm(), prev_a = (a.actor - a.critic).norm();
        double prev_t = w.theta.norm(), prev_d = std::abs(w.dist);
        // Explicit Euler chatters around zero at amplitude ~h^{3/2} because of the cube root.
        const double h = 1e-4;
        const double kChatter = 1e-5;
        for (int step = 0; step < 5000; ++step) {
            w.critic += h * critic_rate(w, s, 0.0, g, ex);
            w.theta += h * theta_rate(w.theta, s, 0.0, g, ex);
            w.dist += h * dist_rate(w.dist, 0.0, g, ex);
            a.actor += h * actor_rate(a, s, g, ex);
            CHECK((w.critic.norm() <= prev_c || w.critic.norm() < kChatter));
            CHECK((w.theta.norm() <= prev_t || w.theta.norm() < kChatter));
            CHECK((std::abs(w.dist) <= prev_d || std::abs(w.dist) < kChatter));
            CHECK(((a.actor - a.critic).norm() <= prev_a || (a.actor - a.critic).norm() < kChatter));
            prev_c = w.critic.norm(), prev_t = w.theta.norm(), prev_d = std::abs(w.dist);
            prev_a = (a.actor - a.critic).norm();
        }
    }
}

TEST_CASE("isolated law settles in a time nearly independent of the start", "[adaptation]")
{
    const double t1 = isolated_settling_time(1.0, 1e-5);
    const double t100 = isolated_settling_time(100.0, 1e-5);
    // Quadrature of dw / (w^{1/3} + w^3) from 1e-3 to w0.
    CHECK_THAT(t1, WithinAbs(1.28545948103987, 2e-5));
    CHECK_THAT(t100, WithinAbs(1.65103110193885, 2e-5));
    CHECK(t1 < 2.1);
    CHECK(t100 < 2.1);
    CHECK(std::abs(t100 - t1) / t1 < 0.35);
}
