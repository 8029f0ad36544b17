#include "fixcon/expression.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fixcon {

double Factor::operator()(std::span<const double> args) const
{
    if (var >= args.size())
        throw std::invalid_argument("expression references argument " + std::to_string(var) +
                                    " but only " + std::to_string(args.size()) + " supplied");
    const double a = scale * args[var] + offset;
    double base = a;
    switch (fn) {
    case FactorFn::Identity: break;
    case FactorFn::Sin: base = std::sin(a); break;
    case FactorFn::Cos: base = std::cos(a); break;
    }
    if (power == 1)
        return base;
    return std::pow(base, power);
}

Expression::Expression(std::vector<Term> terms) : terms_(std::move(terms))
{
    for (const auto& t : terms_)
        for (const auto& f : t.factors)
            if (f.power < 0)
                throw std::invalid_argument("negative factor powers are not supported");
}

Expression Expression::constant(double c)
{
    return Expression({Term{c, {}}});
}

double Expression::operator()(std::span<const double> args) const
{
    double sum = 0.0;
    for (const auto& t : terms_) {
        double prod = t.coeff;
        for (const auto& f : t.factors)
            prod *= f(args);
        sum += prod;
    }
    return sum;
}

int Expression::max_variable() const
{
    int m = -1;
    for (const auto& t : terms_)
        for (const auto& f : t.factors)
            m = std::max(m, static_cast<int>(f.var));
    return m;
}

std::string Expression::to_string(const std::string& var_prefix) const
{
    if (terms_.empty())
        return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& t : terms_) {
        if (!first)
            os << " + ";
        first = false;
        os << t.coeff;
        for (const auto& f : t.factors) {
            os << "*";
            const std::string arg = var_prefix + std::to_string(f.var + 1);
            std::ostringstream inner;
            if (f.scale != 1.0)
                inner << f.scale << "*";
            inner << arg;
            if (f.offset != 0.0)
                inner << "+" << f.offset;
            switch (f.fn) {
            case FactorFn::Identity: os << "(" << inner.str() << ")"; break;
            case FactorFn::Sin: os << "sin(" << inner.str() << ")"; break;
            case FactorFn::Cos: os << "cos(" << inner.str() << ")"; break;
            }
            if (f.power != 1)
                os << "^" << f.power;
        }
    }
    return os.str();
}

Expression operator+(Expression a, const Expression& b)
{
    std::vector<Term> terms = a.terms();
    terms.insert(terms.end(), b.terms().begin(), b.terms().end());
    return Expression(std::move(terms));
}

}  // namespace fixcon
