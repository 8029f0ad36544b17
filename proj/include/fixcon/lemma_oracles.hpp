#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fixcon {

/// lhs <= rhs, evaluated numerically.
struct InequalityWitness {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // rhs - lhs
    std::vector<double> inputs;

    /// slack >= -1e-9 * max(1, |lhs|, |rhs|)
    bool passed() const;
};

InequalityWitness make_witness(double lhs, double rhs, std::vector<double> inputs = {});

/// Power-sum inequalities for non-negative v:
///   p <= 1:  (sum v)^p <= sum v^p
///   p >  1:  n^{1-p} (sum v)^p <= sum v^p
InequalityWitness lemma2_check(std::span<const double> values, double p);

/// ab <= (c^p / p) |a|^p + (1 / (c^q q)) |b|^q for conjugate p, q > 1.
InequalityWitness young_check(double a, double b, double p, double q, double c);

/// -a^T (a+b)^{1/3} <= -1/2 sum a^{4/3} + sum b^{4/3}, signed powers.
InequalityWitness lemma4_check(std::span<const double> a, std::span<const double> b);

/// -a^T (a+b)^3 <= -1/8 sum a^4 + 172 sum b^4.
InequalityWitness lemma5_check(std::span<const double> a, std::span<const double> b);

struct SweepSummary {
    std::string name;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::size_t failures = 0;
    double min_relative_slack = 0.0;  // slack / max(1, |lhs|, |rhs|)
    InequalityWitness worst;
};

/// Randomized sweeps with a fixed seed. Vectors have length 1..max_dim with
/// entries uniform in [-range, range]; lemma2 draws from [0, range], Young
/// draws p in (1, 10] and c in [0.1, 10].
SweepSummary sweep_lemma4(std::size_t trials, std::uint64_t seed, std::size_t max_dim = 8, double range = 10.0);
SweepSummary sweep_lemma5(std::size_t trials, std::uint64_t seed, std::size_t max_dim = 8, double range = 10.0);
SweepSummary sweep_lemma2(std::size_t trials, std::uint64_t seed, std::size_t max_dim = 8, double range = 10.0);
SweepSummary sweep_young(std::size_t trials, std::uint64_t seed, double range = 10.0);

}  // namespace fixcon
