#include "fixcon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fixcon {

double tmax_bound(double k_p, double k_q, double p, double q)
{
    if (!(k_p > 0.0) || !(k_q > 0.0))
        throw std::invalid_argument("tmax_bound needs positive k_p and k_q");
    if (!(p < 1.0) || !(q > 1.0))
        throw std::invalid_argument("tmax_bound needs p < 1 < q");
    const double first = std::isinf(k_p) ? 0.0 : 1.0 / (k_p * (1.0 - p));
    const double second = std::isinf(k_q) ? 0.0 : 1.0 / (k_q * (q - 1.0));
    return first + second;
}

AggregatedBounds aggregated_bound(const ControllerGains& gains, std::size_t layers, std::size_t followers)
{
    if (layers == 0 || followers == 0)
        throw std::invalid_argument("aggregated bound needs at least one agent and layer");
    double kp = std::numeric_limits<double>::infinity();
    double kq = std::numeric_limits<double>::infinity();
    for (const auto& agent : gains.per_agent)
        for (const auto& g : agent) {
            kp = std::min(kp, g.k_p);
            kq = std::min(kq, g.k_q);
        }
    const double p = gains.exponents.p;
    const double q = gains.exponents.q;
    const double p_tilde = 0.5 * (p + 1.0);
    const double q_tilde = 0.5 * (q + 1.0);
    const double nn = static_cast<double>(layers * followers);

    AggregatedBounds out;
    const double kp_eff = std::pow(2.0, p_tilde) * kp;
    const double kq_eff = std::pow(2.0, q_tilde) * std::pow(nn, 1.0 - q_tilde) * kq;
    const bool fixed_time = kp_eff > 0.0 && kq_eff > 0.0;
    const double none = std::numeric_limits<double>::infinity();
    out.stated = {fixed_time ? tmax_bound(kp_eff, kq_eff, p, q) : none, kp_eff, kq_eff, p, q};
    out.derived = {fixed_time ? tmax_bound(kp_eff, kq_eff, p_tilde, q_tilde) : none, kp_eff, kq_eff, p_tilde, q_tilde};
    return out;
}

std::optional<double> settling_time(const std::vector<double>& times, const std::vector<double>& error,
                                    double threshold)
{
    if (!(threshold > 0.0))
        throw std::invalid_argument("settling threshold must be positive");
    if (times.size() != error.size())
        throw std::invalid_argument("settling_time: times and errors differ in length");
    if (times.empty())
        return std::nullopt;
    // The settling time is the last sample outside the band; after it the
    // error stays inside.
    std::size_t k = times.size();
    while (k > 0 && std::abs(error[k - 1]) < threshold)
        --k;
    if (k == times.size())
        return std::nullopt;
    return k == 0 ? times.front() : times[k - 1];
}

std::vector<std::optional<double>> settling_time(const SimulationTrace& trace, double threshold)
{
    const std::vector<double> t = trace.times();
    std::vector<std::optional<double>> out;
    for (std::size_t i = 0; i < trace.followers; ++i) {
        std::vector<double> err;
        err.reserve(t.size());
        for (const auto& s : trace.samples)
            err.push_back(s.tracking_error(i));
        out.push_back(settling_time(t, err, threshold));
    }
    return out;
}

namespace {

void check_radii_args(double k_p, double k_q, double p, double q, double vartheta)
{
    if (!(vartheta > 0.0 && vartheta < 1.0))
        throw std::invalid_argument("vartheta must lie in (0,1)");
    if (!(k_p > 0.0) || !(k_q > 0.0))
        throw std::invalid_argument("radii need positive k_p and k_q");
    if (!(p > 0.0) || !(q > 0.0))
        throw std::invalid_argument("radii need positive exponents");
}

}  // namespace

ConvergenceRadii omega_radii(double c, double k_p, double k_q, double p, double q, double vartheta,
                             double lambda_min)
{
    check_radii_args(k_p, k_q, p, q, vartheta);
    if (!(c >= 0.0))
        throw std::invalid_argument("aggregate constant C must be non-negative");
    if (!(lambda_min > 0.0))
        throw std::invalid_argument("lambda_min must be positive");
    const double a = std::pow(c / ((1.0 - vartheta) * k_p), p);
    const double b = std::pow(c / ((1.0 - vartheta) * k_q), q);
    ConvergenceRadii r;
    r.omega_e = std::sqrt(2.0 * std::min(a, b));
    r.omega_z = r.omega_e / lambda_min;
    r.c_aggregate = c;
    r.vartheta = vartheta;
    return r;
}

double back_solve_c(double omega_e, double k_p, double k_q, double p, double q, double vartheta)
{
    check_radii_args(k_p, k_q, p, q, vartheta);
    if (!(omega_e >= 0.0))
        throw std::invalid_argument("radius must be non-negative");
    // min{(C/a)^p, (C/b)^q} = omega^2/2; each branch is increasing in C, so
    // the answer is the larger of the two single-branch solutions.
    const double level = 0.5 * omega_e * omega_e;
    const double from_p = (1.0 - vartheta) * k_p * std::pow(level, 1.0 / p);
    const double from_q = (1.0 - vartheta) * k_q * std::pow(level, 1.0 / q);
    return std::max(from_p, from_q);
}

double lyapunov_value(std::span<const double> signal, std::span<const StepWeights> weights,
                      std::span<const StepWeights> proxy, std::span<const StepGains> gains)
{
    if (weights.size() != proxy.size() || weights.size() != gains.size() || signal.size() != weights.size())
        throw std::invalid_argument("lyapunov_value: dimension mismatch");
    double v = 0.0;
    for (double s : signal)
        v += 0.5 * s * s;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const StepWeights& w = weights[j];
        const StepWeights& ideal = proxy[j];
        const StepGains& g = gains[j];
        if (w.critic.size() != ideal.critic.size() || w.actor.size() != ideal.actor.size() ||
            w.theta.size() != ideal.theta.size())
            throw std::invalid_argument("lyapunov_value: weight dimension mismatch");
        const Vector wc = ideal.critic - w.critic;
        const Vector wa = ideal.actor - w.actor;
        const Vector th = ideal.theta - w.theta;
        const double dd = ideal.dist - w.dist;
        v += 0.5 * wc.dot(g.gamma_c.apply_inverse(wc));
        v += 0.5 * wa.dot(g.gamma_a.apply_inverse(wa));
        v += 0.5 * th.dot(g.gamma_theta.apply_inverse(th));
        if (g.gamma_d > 0.0)
            v += 0.5 * dd * dd / g.gamma_d;
    }
    return v;
}

LyapunovSeries lyapunov_diagnostic(const SimulationTrace& trace, const ControllerGains& gains,
                                   const std::vector<std::vector<StepWeights>>& proxy_ideal, double terminal_level)
{
    if (proxy_ideal.size() != trace.followers || gains.per_agent.size() != trace.followers)
        throw std::invalid_argument("lyapunov_diagnostic: dimension mismatch");
    LyapunovSeries out;
    for (const auto& s : trace.samples) {
        double v = 0.0;
        for (std::size_t i = 0; i < trace.followers; ++i)
            v += lyapunov_value(s.signal.at(i), s.weights.at(i), proxy_ideal[i], gains.per_agent[i]);
        out.t.push_back(s.t);
        out.v.push_back(v);
    }
    out.envelope.resize(out.v.size());
    double running = -std::numeric_limits<double>::infinity();
    for (std::size_t k = out.v.size(); k-- > 0;) {
        running = std::max(running, out.v[k]);
        out.envelope[k] = running;
    }
    std::size_t counted = 0;
    std::size_t monotone = 0;
    for (std::size_t k = 1; k < out.v.size(); ++k) {
        if (out.v[k - 1] <= terminal_level)
            break;
        ++counted;
        if (out.v[k] <= out.v[k - 1] * (1.0 + 1e-12) + 1e-15)
            ++monotone;
    }
    out.envelope_monotone_fraction = counted == 0 ? 1.0 : static_cast<double>(monotone) / static_cast<double>(counted);
    return out;
}

TruthF1 truth_oracle_f1(const SystemState& state, const Topology& topology, const LeaderSpec& leader,
                        const std::vector<StrictFeedbackModel>& models, std::size_t agent, double t)
{
    const std::size_t n = models.at(agent).layers();
    const std::vector<double> x0 = leader.state_at(state.leader.x, t, n);
    auto second = [n](const std::vector<double>& x) { return n > 1 ? x.at(1) : 0.0; };

    double g = topology.pinning(agent);
    TruthF1 out;
    for (std::size_t l = 0; l < topology.followers(); ++l) {
        const double a = topology.weight(agent, l);
        if (a == 0.0)
            continue;
        g += a;
        const auto& xl = state.followers.at(l).x;
        out.f -= a * (second(xl) + models.at(l).layer_fn(0, xl));
        out.d -= a * models.at(l).disturbance(0, t);
    }
    const double b = topology.pinning(agent);
    if (b != 0.0) {
        out.f -= b * (second(x0) + leader.layer_fn(0, x0));
        out.d -= b * leader.disturbance(0, t);
    }
    const auto& xi = state.followers.at(agent).x;
    out.f += g * models.at(agent).layer_fn(0, xi);
    out.d += g * models.at(agent).disturbance(0, t);
    return out;
}

double structural_identity_residual(const SimulationTrace& trace, const Eigen::MatrixXd& ltilde)
{
    const auto n = static_cast<Eigen::Index>(trace.followers);
    if (ltilde.rows() != n || ltilde.cols() != n)
        throw std::invalid_argument("structural identity: L~ does not match trace");
    double worst = 0.0;
    Eigen::VectorXd z(n), e(n);
    for (const auto& s : trace.samples) {
        for (Eigen::Index i = 0; i < n; ++i) {
            z(i) = s.tracking_error(static_cast<std::size_t>(i));
            e(i) = s.e.at(static_cast<std::size_t>(i));
        }
        worst = std::max(worst, (e - ltilde * z).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

double convergence_exponent(const std::vector<double>& coarse, const std::vector<double>& mid,
                            const std::vector<double>& fine)
{
    if (coarse.size() != mid.size() || mid.size() != fine.size())
        throw std::invalid_argument("convergence_exponent: state sizes differ");
    double d1 = 0.0;
    double d2 = 0.0;
    for (std::size_t k = 0; k < coarse.size(); ++k) {
        d1 = std::max(d1, std::abs(coarse[k] - mid[k]));
        d2 = std::max(d2, std::abs(mid[k] - fine[k]));
    }
    if (d2 == 0.0)
        return d1 == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
    return std::log2(d1 / d2);
}

}  // namespace fixcon
