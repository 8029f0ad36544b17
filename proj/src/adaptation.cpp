#include "fixcon/adaptation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fixcon {

double signed_pow(double x, double r)
{
    if (x == 0.0)
        return 0.0;
    if (r == 3.0)
        return x * x * x;
    if (r == 1.0 / 3.0)
        return std::cbrt(x);
    return std::copysign(std::pow(std::abs(x), r), x);
}

Vector signed_pow(const Vector& x, double r)
{
    return x.unaryExpr([r](double v) { return signed_pow(v, r); });
}

GainMatrix::GainMatrix(Eigen::MatrixXd full) : scale_(1.0), full_(std::move(full))
{
    if (full_->rows() != full_->cols())
        throw std::invalid_argument("gain matrix must be square");
}

Vector GainMatrix::apply(const Vector& v) const
{
    if (!full_)
        return scale_ * v;
    if (full_->cols() != v.size())
        throw std::invalid_argument("gain matrix dimension does not match weight vector");
    return *full_ * v;
}

void GainMatrix::apply_in_place(Eigen::Ref<Vector> v) const
{
    if (!full_) {
        v *= scale_;
        return;
    }
    if (full_->cols() != v.size())
        throw std::invalid_argument("gain matrix dimension does not match weight vector");
    v = (*full_ * v).eval();
}

Vector GainMatrix::apply_inverse(const Vector& v) const
{
    if (!full_)
        return v / scale_;
    if (full_->cols() != v.size())
        throw std::invalid_argument("gain matrix dimension does not match weight vector");
    return full_->ldlt().solve(v);
}

double GainMatrix::max_inverse_eigenvalue() const
{
    if (!full_)
        return 1.0 / scale_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (*full_ + full_->transpose()));
    return 1.0 / es.eigenvalues().minCoeff();
}

bool GainMatrix::positive_definite() const
{
    if (!full_)
        return scale_ > 0.0;
    if (!full_->isApprox(full_->transpose()))
        return false;
    Eigen::LLT<Eigen::MatrixXd> llt(*full_);
    return llt.info() == Eigen::Success;
}

namespace {

bool is_odd_ratio(double r)
{
    for (long den = 1; den < 1000; den += 2) {
        const double num = r * static_cast<double>(den);
        const double rounded = std::round(num);
        if (std::abs(num - rounded) < 1e-9 * std::max(1.0, std::abs(num)))
            return static_cast<long>(std::abs(rounded)) % 2 == 1;
    }
    return false;
}

}  // namespace

void check_exponents(const Exponents& ex)
{
    if (!(ex.p > 0.0 && ex.p < 1.0))
        throw std::invalid_argument("exponent p must lie in (0,1)");
    if (!(ex.q > 1.0))
        throw std::invalid_argument("exponent q must exceed 1");
    if (!is_odd_ratio(ex.p) || !is_odd_ratio(ex.q))
        throw std::invalid_argument("exponents p and q must be ratios of odd integers");
}

void check_gain_signs(const StepGains& g)
{
    const std::pair<const char*, double> scalars[] = {
        {"k", g.k},
        {"k_p", g.k_p},
        {"k_q", g.k_q},
        {"sigma_1c", g.sigma_1c},
        {"sigma_2c", g.sigma_2c},
        {"sigma_3c", g.sigma_3c},
        {"sigma_1a", g.sigma_1a},
        {"sigma_2a", g.sigma_2a},
        {"sigma_3a", g.sigma_3a},
        {"sigma_1theta", g.sigma_1theta},
        {"sigma_2theta", g.sigma_2theta},
        {"sigma_1d", g.sigma_1d},
        {"sigma_2d", g.sigma_2d},
        {"gamma_d", g.gamma_d},
    };
    for (const auto& [name, v] : scalars)
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument(std::string("gain ") + name + " must be finite and non-negative");
    if (!(g.mu_d > 0.0))
        throw std::invalid_argument("mu_d must be positive");
    const std::pair<const char*, const GainMatrix*> mats[] = {
        {"gamma_c", &g.gamma_c}, {"gamma_a", &g.gamma_a}, {"gamma_theta", &g.gamma_theta}};
    for (const auto& [name, m] : mats) {
        if (m->is_scalar() && (!std::isfinite(m->scale()) || m->scale() < 0.0))
            throw std::invalid_argument(std::string("gain ") + name + " must be finite and non-negative");
        if (!m->is_scalar() && !m->positive_definite())
            throw std::invalid_argument(std::string("gain matrix ") + name + " must be symmetric positive definite");
    }
}

StepWeights StepWeights::zeros(std::size_t neurons, std::size_t theta_neurons)
{
    const auto m = static_cast<Eigen::Index>(neurons);
    return {Vector::Zero(m), Vector::Zero(m), Vector::Zero(static_cast<Eigen::Index>(theta_neurons)), 0.0};
}

namespace {

void require_same_size(const Vector& a, const Vector& b, const char* what)
{
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
}

}  // namespace

void critic_rate(const StepWeights& w, const Vector& s, double error, const StepGains& g, const Exponents& ex,
                 Eigen::Ref<Vector> out)
{
    require_same_size(w.critic, s, "critic_rate");
    const Vector& wc = w.critic;
    const double sw = s.dot(wc);
    for (Eigen::Index k = 0; k < wc.size(); ++k)
        out(k) = -s(k) * error - g.sigma_1c * s(k) * sw - g.sigma_2c * signed_pow(wc(k), ex.p) -
                 g.sigma_3c * signed_pow(wc(k), ex.q);
    g.gamma_c.apply_in_place(out);
}

void actor_rate(const StepWeights& w, const Vector& s, const StepGains& g, const Exponents& ex, Eigen::Ref<Vector> out)
{
    require_same_size(w.actor, s, "actor_rate");
    require_same_size(w.critic, s, "actor_rate");
    double sd = 0.0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
        sd += s(k) * (w.actor(k) - w.critic(k));
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        const double delta = w.actor(k) - w.critic(k);
        out(k) = -(g.sigma_1a * s(k) * sd + g.sigma_2a * signed_pow(delta, ex.p) + g.sigma_3a * signed_pow(delta, ex.q));
    }
    g.gamma_a.apply_in_place(out);
}

void theta_rate(const Vector& theta, const Vector& features, double error, const StepGains& g, const Exponents& ex,
                Eigen::Ref<Vector> out)
{
    require_same_size(theta, features, "theta_rate");
    for (Eigen::Index k = 0; k < theta.size(); ++k)
        out(k) = error * features(k) - g.sigma_1theta * signed_pow(theta(k), ex.p) -
                 g.sigma_2theta * signed_pow(theta(k), ex.q);
    g.gamma_theta.apply_in_place(out);
}

Vector critic_rate(const StepWeights& w, const Vector& s, double error, const StepGains& g, const Exponents& ex)
{
    Vector out(w.critic.size());
    critic_rate(w, s, error, g, ex, out);
    return out;
}

Vector actor_rate(const StepWeights& w, const Vector& s, const StepGains& g, const Exponents& ex)
{
    Vector out(w.actor.size());
    actor_rate(w, s, g, ex, out);
    return out;
}

Vector theta_rate(const Vector& theta, const Vector& features, double error, const StepGains& g,
                  const Exponents& ex)
{
    Vector out(theta.size());
    theta_rate(theta, features, error, g, ex, out);
    return out;
}

double dist_rate(double dist, double error, const StepGains& g, const Exponents& ex)
{
    return g.gamma_d * (error - g.sigma_1d * signed_pow(dist, ex.p) - g.sigma_2d * signed_pow(dist, ex.q));
}

std::vector<std::string> GainReport::warnings() const
{
    std::vector<std::string> out;
    for (const auto& c : checks)
        if (!c.passed)
            out.push_back(c.id);
    return out;
}

GainReport validate_gains(const StepGains& g, std::size_t step)
{
    GainReport r;
    r.step = step;
    auto add = [&r](std::string id, std::string condition, bool passed, const std::string& detail) {
        r.checks.push_back({std::move(id), std::move(condition), passed, detail});
    };
    auto fmt = [](std::initializer_list<std::pair<const char*, double>> vals) {
        std::ostringstream os;
        bool first = true;
        for (const auto& [n, v] : vals) {
            os << (first ? "" : ", ") << n << "=" << v;
            first = false;
        }
        return os.str();
    };

    constexpr double kLemma5Factor = 8.0 * 172.0;
    add("k", "k > 3/2", g.k > 1.5, fmt({{"k", g.k}}));
    add("sigma_1", "sigma_1c > sigma_1a > 1", g.sigma_1c > g.sigma_1a && g.sigma_1a > 1.0,
        fmt({{"sigma_1c", g.sigma_1c}, {"sigma_1a", g.sigma_1a}}));
    add("sigma_2", "sigma_2c > 2 sigma_2a > 0", g.sigma_2c > 2.0 * g.sigma_2a && g.sigma_2a > 0.0,
        fmt({{"sigma_2c", g.sigma_2c}, {"sigma_2a", g.sigma_2a}}));
    add("sigma_3", "0 < sigma_3a < sigma_3c / 1376", g.sigma_3a > 0.0 && g.sigma_3a < g.sigma_3c / kLemma5Factor,
        fmt({{"sigma_3a", g.sigma_3a}, {"sigma_3c", g.sigma_3c}}));
    add("sigma_2d", "sigma_2d > 2 / mu_d^4", g.sigma_2d > 2.0 / std::pow(g.mu_d, 4),
        fmt({{"sigma_2d", g.sigma_2d}, {"mu_d", g.mu_d}}));

    const bool positive = g.k > 0 && g.k_p > 0 && g.k_q > 0 && g.sigma_1c > 0 && g.sigma_2c > 0 && g.sigma_3c > 0 &&
                          g.sigma_1a > 0 && g.sigma_2a > 0 && g.sigma_3a > 0 && g.sigma_1theta > 0 &&
                          g.sigma_2theta > 0 && g.sigma_1d > 0 && g.sigma_2d > 0 && g.gamma_d > 0 &&
                          g.gamma_c.positive_definite() && g.gamma_a.positive_definite() &&
                          g.gamma_theta.positive_definite();
    add("positivity", "all gains strictly positive", positive, positive ? "" : "some gain is zero");
    return r;
}

}  // namespace fixcon
