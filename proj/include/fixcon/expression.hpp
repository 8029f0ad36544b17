#pragma once

#include <span>
#include <string>
#include <vector>

namespace fixcon {

// A factor is fn(scale * v + offset)^power, where v is one argument of the
// expression (a plant state, or time for disturbance signals).
enum class FactorFn { Identity, Sin, Cos };

struct Factor {
    FactorFn fn = FactorFn::Identity;
    std::size_t var = 0;
    double scale = 1.0;
    double offset = 0.0;
    int power = 1;

    double operator()(std::span<const double> args) const;
};

struct Term {
    double coeff = 0.0;
    std::vector<Factor> factors;  // empty: constant term
};

/// Sum of products of trigonometric/polynomial factors.
///
/// This is the small closed-form schema used for layer nonlinearities and
/// disturbance signals in experiment configs. The zero expression has no
/// terms.
class Expression {
public:
    Expression() = default;
    explicit Expression(std::vector<Term> terms);

    static Expression constant(double c);

    double operator()(std::span<const double> args) const;
    double operator()(double arg) const { return (*this)(std::span<const double>(&arg, 1)); }

    /// Largest argument index referenced, or -1 for a constant expression.
    int max_variable() const;
    bool is_zero() const { return terms_.empty(); }
    const std::vector<Term>& terms() const { return terms_; }

    std::string to_string(const std::string& var_prefix) const;

private:
    std::vector<Term> terms_;
};

Expression operator+(Expression a, const Expression& b);

}  // namespace fixcon
