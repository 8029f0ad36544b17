#include "fixcon/lemma_oracles.hpp"

#include "fixcon/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

namespace fixcon {

namespace {

double scale_of(double lhs, double rhs)
{
    return std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

void require_same_length(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("vectors differ in length (" + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b)
{
    std::vector<double> v(a.begin(), a.end());
    v.insert(v.end(), b.begin(), b.end());
    return v;
}

// |x|^{4/3} as the fourth power of the signed cube root.
double four_thirds(double x)
{
    const double r = signed_pow(x, 1.0 / 3.0);
    const double r2 = r * r;
    return r2 * r2;
}

}  // namespace

bool InequalityWitness::passed() const
{
    return slack >= -1e-9 * scale_of(lhs, rhs);
}

InequalityWitness make_witness(double lhs, double rhs, std::vector<double> inputs)
{
    return {lhs, rhs, rhs - lhs, std::move(inputs)};
}

InequalityWitness lemma2_check(std::span<const double> values, double p)
{
    if (!(p > 0.0))
        throw std::invalid_argument("lemma2 needs p > 0");
    if (values.empty())
        throw std::invalid_argument("lemma2 needs at least one value");
    double sum = 0.0;
    double power_sum = 0.0;
    for (double v : values) {
        if (v < 0.0)
            throw std::invalid_argument("lemma2 values must be non-negative");
        sum += v;
        power_sum += std::pow(v, p);
    }
    const double n = static_cast<double>(values.size());
    const double lhs = p <= 1.0 ? std::pow(sum, p) : std::pow(n, 1.0 - p) * std::pow(sum, p);
    std::vector<double> in(values.begin(), values.end());
    in.push_back(p);
    return make_witness(lhs, power_sum, std::move(in));
}

InequalityWitness young_check(double a, double b, double p, double q, double c)
{
    if (!(p > 1.0) || !(q > 1.0) || std::abs(1.0 / p + 1.0 / q - 1.0) > 1e-12)
        throw std::invalid_argument("Young's inequality needs conjugate exponents p, q > 1");
    if (!(c > 0.0))
        throw std::invalid_argument("Young's inequality needs c > 0");
    const double rhs = std::pow(c, p) / p * std::pow(std::abs(a), p) + std::pow(std::abs(b), q) / (std::pow(c, q) * q);
    return make_witness(a * b, rhs, {a, b, p, q, c});
}

InequalityWitness lemma4_check(std::span<const double> a, std::span<const double> b)
{
    require_same_length(a, b);
    double lhs = 0.0;
    double rhs = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        lhs -= a[i] * signed_pow(a[i] + b[i], 1.0 / 3.0);
        rhs += -0.5 * four_thirds(a[i]) + four_thirds(b[i]);
    }
    return make_witness(lhs, rhs, concat(a, b));
}

InequalityWitness lemma5_check(std::span<const double> a, std::span<const double> b)
{
    require_same_length(a, b);
    double lhs = 0.0;
    double rhs = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        lhs -= a[i] * signed_pow(a[i] + b[i], 3.0);
        const double a2 = a[i] * a[i];
        const double b2 = b[i] * b[i];
        rhs += -0.125 * a2 * a2 + 172.0 * b2 * b2;
    }
    return make_witness(lhs, rhs, concat(a, b));
}

namespace {

SweepSummary run_sweep(std::string name, std::size_t trials, std::uint64_t seed,
                       const std::function<InequalityWitness(std::mt19937_64&)>& draw)
{
    SweepSummary s;
    s.name = std::move(name);
    s.seed = seed;
    s.trials = trials;
    s.min_relative_slack = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < trials; ++k) {
        InequalityWitness w = draw(rng);
        if (!w.passed())
            ++s.failures;
        const double rel = w.slack / scale_of(w.lhs, w.rhs);
        if (rel < s.min_relative_slack) {
            s.min_relative_slack = rel;
            s.worst = std::move(w);
        }
    }
    return s;
}

std::vector<double> draw_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v)
        x = u(rng);
    return v;
}

std::size_t draw_dim(std::mt19937_64& rng, std::size_t max_dim)
{
    return std::uniform_int_distribution<std::size_t>(1, max_dim)(rng);
}

}  // namespace

SweepSummary sweep_lemma4(std::size_t trials, std::uint64_t seed, std::size_t max_dim, double range)
{
    return run_sweep("lemma4", trials, seed, [=](std::mt19937_64& rng) {
        const std::size_t n = draw_dim(rng, max_dim);
        const auto a = draw_vector(rng, n, -range, range);
        const auto b = draw_vector(rng, n, -range, range);
        return lemma4_check(a, b);
    });
}

SweepSummary sweep_lemma5(std::size_t trials, std::uint64_t seed, std::size_t max_dim, double range)
{
    return run_sweep("lemma5", trials, seed, [=](std::mt19937_64& rng) {
        const std::size_t n = draw_dim(rng, max_dim);
        const auto a = draw_vector(rng, n, -range, range);
        const auto b = draw_vector(rng, n, -range, range);
        return lemma5_check(a, b);
    });
}

SweepSummary sweep_lemma2(std::size_t trials, std::uint64_t seed, std::size_t max_dim, double range)
{
    return run_sweep("lemma2", trials, seed, [=](std::mt19937_64& rng) {
        const std::size_t n = draw_dim(rng, max_dim);
        const auto v = draw_vector(rng, n, 0.0, range);
        // Half the trials exercise p <= 1, half p > 1.
        const double p = std::bernoulli_distribution(0.5)(rng) ? std::uniform_real_distribution<double>(0.05, 1.0)(rng)
                                                               : std::uniform_real_distribution<double>(1.0, 5.0)(rng);
        return lemma2_check(v, p);
    });
}

SweepSummary sweep_young(std::size_t trials, std::uint64_t seed, double range)
{
    return run_sweep("young", trials, seed, [=](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> val(-range, range);
        const double a = val(rng);
        const double b = val(rng);
        const double p = std::uniform_real_distribution<double>(1.01, 10.0)(rng);
        const double q = p / (p - 1.0);
        const double c = std::exp(std::uniform_real_distribution<double>(std::log(0.1), std::log(10.0))(rng));
        return young_check(a, b, p, q, c);
    });
}

}  // namespace fixcon
