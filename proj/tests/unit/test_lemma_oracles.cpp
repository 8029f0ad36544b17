#include "fixcon/lemma_oracles.hpp"

#include "fixcon/adaptation.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace fixcon;
using Catch::Matchers::WithinAbs;

TEST_CASE("witness tolerance", "[lemma_oracles]")
{
    CHECK(make_witness(1.0, 1.0).passed());
    CHECK(make_witness(1.0 + 5e-10, 1.0).passed());
    CHECK_FALSE(make_witness(1.0 + 5e-9, 1.0).passed());
    CHECK(make_witness(1e6 + 1e-4, 1e6).passed());
    CHECK_FALSE(make_witness(1e6 + 1e-2, 1e6).passed());
}

TEST_CASE("power-sum inequality", "[lemma_oracles]")
{
    const std::vector<double> single{3.7};
    CHECK_THAT(lemma2_check(single, 0.4).slack, WithinAbs(0.0, 1e-14));
    const std::vector<double> ones{1.0, 1.0};
    const auto cube = lemma2_check(ones, 3.0);
    CHECK_THAT(cube.lhs, WithinAbs(2.0, 1e-14));
    CHECK_THAT(cube.slack, WithinAbs(0.0, 1e-14));
    const auto root = lemma2_check(ones, 0.5);
    CHECK_THAT(root.lhs, WithinAbs(std::sqrt(2.0), 1e-14));
    CHECK(root.slack > 0.0);
    const std::vector<double> negative{1.0, -1.0};
    CHECK_THROWS(lemma2_check(negative, 0.5));
}

TEST_CASE("Young's inequality", "[lemma_oracles]")
{
    CHECK(young_check(0.0, 4.0, 2.0, 2.0, 1.0).passed());
    CHECK_THAT(young_check(1.0, 1.0, 2.0, 2.0, 1.0).slack, WithinAbs(0.0, 1e-15));
    const auto w = young_check(2.0, 3.0, 4.0, 4.0 / 3.0, 1.0);
    CHECK_THAT(w.lhs, WithinAbs(6.0, 1e-15));
    CHECK_THAT(w.rhs, WithinAbs(7.245061533191668, 1e-12));
    CHECK(w.passed());
    CHECK_THROWS(young_check(1.0, 1.0, 2.0, 3.0, 1.0));
    CHECK_THROWS(young_check(1.0, 1.0, 2.0, 2.0, 0.0));
}

TEST_CASE("cube-root inequality", "[lemma_oracles]")
{
    const std::vector<double> zero{0.0}, one{1.0};
    CHECK(lemma4_check(zero, zero).slack == 0.0);
    const auto w = lemma4_check(one, zero);
    CHECK_THAT(w.lhs, WithinAbs(-1.0, 1e-15));
    CHECK_THAT(w.rhs, WithinAbs(-0.5, 1e-15));
    CHECK_THAT(w.slack, WithinAbs(0.5, 1e-15));
    const std::vector<double> two{1.0, 2.0};
    CHECK_THROWS(lemma4_check(one, two));
}

TEST_CASE("cubic inequality", "[lemma_oracles]")
{
    const std::vector<double> zero{0.0}, one{1.0};
    CHECK(lemma5_check(zero, zero).slack == 0.0);
    const auto w = lemma5_check(one, zero);
    CHECK_THAT(w.lhs, WithinAbs(-1.0, 1e-15));
    CHECK_THAT(w.rhs, WithinAbs(-0.125, 1e-15));
    const std::vector<double> two{1.0, 2.0};
    CHECK_THROWS(lemma5_check(one, two));
}

TEST_CASE("cubic inequality scales with the fourth power", "[lemma_oracles]")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(4), b(4);
        for (int k = 0; k < 4; ++k)
            a[k] = u(rng), b[k] = u(rng);
        const auto base = lemma5_check(a, b);
        for (double s : {0.5, 2.0}) {
            std::vector<double> as = a, bs = b;
            for (int k = 0; k < 4; ++k)
                as[k] *= s, bs[k] *= s;
            const auto scaled = lemma5_check(as, bs);
            const double s4 = std::pow(s, 4);
            CHECK_THAT(scaled.lhs, WithinAbs(s4 * base.lhs, 1e-9 * (1.0 + std::abs(s4 * base.lhs))));
            CHECK_THAT(scaled.rhs, WithinAbs(s4 * base.rhs, 1e-9 * (1.0 + std::abs(s4 * base.rhs))));
            CHECK_THAT(scaled.slack, WithinAbs(s4 * base.slack, 1e-9 * (1.0 + std::abs(s4 * base.slack))));
        }
    }
}

TEST_CASE("four-thirds powers are non-negative", "[lemma_oracles]")
{
    for (double a = -10.0; a <= 10.0; a += 0.013)
        CHECK(std::pow(signed_pow(a, 1.0 / 3.0), 4) >= 0.0);
}

TEST_CASE("randomized sweeps find no counterexample", "[lemma_oracles]")
{
    for (const auto& s : {sweep_lemma2(20000, 1), sweep_young(20000, 2), sweep_lemma4(20000, 3),
                          sweep_lemma5(20000, 4)}) {
        INFO(s.name << " worst slack " << s.worst.slack);
        CHECK(s.trials == 20000);
        CHECK(s.failures == 0);
    }
}

TEST_CASE("sweeps are reproducible from the seed", "[lemma_oracles]")
{
    const auto a = sweep_lemma4(500, 99);
    const auto b = sweep_lemma4(500, 99);
    CHECK(a.min_relative_slack == b.min_relative_slack);
    CHECK(a.worst.inputs == b.worst.inputs);
}
