#include "fixcon/controller.hpp"

#include <stdexcept>
#include <string>

namespace fixcon {

double consensus_error(double own_output, std::span<const NeighborOutput> neighbors, const LeaderLink& leader)
{
    double e = 0.0;
    for (const auto& nb : neighbors) {
        if (nb.weight < 0.0)
            throw std::invalid_argument("neighbor weights must be non-negative");
        e += nb.weight * (own_output - nb.output);
    }
    if (leader.weight < 0.0)
        throw std::invalid_argument("leader weight must be non-negative");
    if (leader.weight > 0.0) {
        if (!leader.output)
            throw std::invalid_argument("pinned follower needs the leader output");
        e += leader.weight * (own_output - *leader.output);
    }
    return e;
}

namespace {

// actor = Wa^T S, estimator = theta^T Phi, both already evaluated.
double step1_law(double e, double actor, double estimator, double dist, double in_degree, const StepGains& g,
                 const Exponents& ex)
{
    const double optimal = -(g.k / in_degree) * e - actor / in_degree;
    const double fixed_time =
        (-g.k_p * signed_pow(e, ex.p) - g.k_q * signed_pow(e, ex.q) - estimator - dist) / in_degree;
    return optimal + fixed_time;
}

double stepj_law(double z, double actor, double estimator, double dist, double z_prev_r, const StepGains& g,
                 const Exponents& ex)
{
    return -g.k * z - actor - g.k_p * signed_pow(z, ex.p) - g.k_q * signed_pow(z, ex.q) - estimator - dist - z_prev_r;
}

}  // namespace

double virtual_control_step1(double e, double x1, const StepWeights& w, const StepNetworks& nets, double in_degree,
                             const StepGains& g, const Exponents& ex)
{
    if (!(in_degree > 0.0))
        throw std::invalid_argument("step-1 virtual control needs a positive in-degree");
    return step1_law(e, nets.critic_actor.output(w.actor, e), nets.theta.output(w.theta, x1), w.dist, in_degree, g,
                     ex);
}

double virtual_control_stepj(double z, const StepWeights& w, const StepNetworks& nets, std::span<const double> chi,
                             double z_prev_r, const StepGains& g, const Exponents& ex)
{
    return stepj_law(z, nets.critic_actor.output(w.actor, z), nets.theta.output(w.theta, chi), w.dist, z_prev_r, g,
                     ex);
}

std::vector<double> assemble_chi(std::span<const double> own_states, std::span<const StepWeights> prior)
{
    std::vector<double> chi;
    assemble_chi(own_states, prior, chi);
    return chi;
}

void assemble_chi(std::span<const double> own_states, std::span<const StepWeights> prior, std::vector<double>& chi)
{
    chi.assign(own_states.begin(), own_states.end());
    for (const auto& w : prior)
        chi.insert(chi.end(), w.critic.begin(), w.critic.end());
    for (const auto& w : prior)
        chi.insert(chi.end(), w.actor.begin(), w.actor.end());
    for (const auto& w : prior)
        chi.insert(chi.end(), w.theta.begin(), w.theta.end());
    for (const auto& w : prior)
        chi.push_back(w.dist);
}

std::size_t chi_dimension(std::size_t step, std::span<const StepNetworks> nets)
{
    // step is 0-based; step k sees x_1..x_{k+1} plus the weights of steps 0..k-1.
    std::size_t dim = step + 1;
    for (std::size_t j = 0; j < step; ++j)
        dim += 2 * nets[j].critic_actor.size() + nets[j].theta.size() + 1;
    return dim;
}

AgentController::AgentController(std::vector<StepNetworks> nets, std::vector<StepGains> gains, Exponents ex)
    : nets_(std::move(nets)), gains_(std::move(gains)), ex_(ex)
{
    if (nets_.empty())
        throw std::invalid_argument("controller needs at least one step");
    if (gains_.size() != nets_.size())
        throw std::invalid_argument("controller needs one gain set per step");
    if (nets_[0].theta.input_dim() != 1)
        throw std::invalid_argument("step-1 estimator basis must take the scalar x_i1");
    for (std::size_t j = 0; j < nets_.size(); ++j) {
        if (nets_[j].critic_actor.input_dim() != 1)
            throw std::invalid_argument("critic/actor bases take a scalar step error");
        if (j > 0 && nets_[j].theta.input_dim() != chi_dimension(j, nets_))
            throw std::invalid_argument("estimator basis of step " + std::to_string(j + 1) + " expects input dim " +
                                        std::to_string(nets_[j].theta.input_dim()) + ", chi has " +
                                        std::to_string(chi_dimension(j, nets_)));
    }
}

Cascade AgentController::control(const LocalInfo& info) const
{
    Cascade c;
    control(info, c);
    return c;
}

void AgentController::control(const LocalInfo& info, Cascade& c) const
{
    const std::size_t n = steps();
    if (info.state.size() != n || info.weights.size() != n)
        throw std::invalid_argument("local state/weights do not match the controller's " + std::to_string(n) +
                                    " steps");
    if (!(info.in_degree > 0.0))
        throw std::invalid_argument("step-1 virtual control needs a positive in-degree");
    c.signal.resize(n);
    c.alpha.resize(n);
    c.s.resize(n);
    c.phi.resize(n);

    c.e = consensus_error(info.state[0], info.neighbors, info.leader);
    c.signal[0] = c.e;
    nets_[0].critic_actor.activations(std::span<const double>(&c.e, 1), c.s[0]);
    nets_[0].theta.activations(info.state.first(1), c.phi[0]);
    const StepWeights& w0 = info.weights[0];
    c.alpha[0] = step1_law(c.e, w0.actor.dot(c.s[0]), w0.theta.dot(c.phi[0]), w0.dist, info.in_degree, gains_[0], ex_);

    for (std::size_t j = 1; j < n; ++j) {
        const double z = info.state[j] - c.alpha[j - 1];
        const double z_prev_r = (j == 1) ? info.in_degree * c.e : c.signal[j - 1];
        assemble_chi(info.state.first(j + 1), info.weights.first(j), c.chi);
        c.signal[j] = z;
        nets_[j].critic_actor.activations(std::span<const double>(&c.signal[j], 1), c.s[j]);
        nets_[j].theta.activations(c.chi, c.phi[j]);
        const StepWeights& w = info.weights[j];
        c.alpha[j] = stepj_law(z, w.actor.dot(c.s[j]), w.theta.dot(c.phi[j]), w.dist, z_prev_r, gains_[j], ex_);
    }
    c.u = c.alpha[n - 1];
}

void AgentController::rates(const Cascade& c, std::span<const StepWeights> weights, std::span<StepWeights> out) const
{
    for (std::size_t j = 0; j < steps(); ++j) {
        const StepWeights& w = weights[j];
        const StepGains& g = gains_[j];
        out[j].critic = critic_rate(w, c.s[j], c.signal[j], g, ex_);
        out[j].actor = actor_rate(w, c.s[j], g, ex_);
        out[j].theta = theta_rate(w.theta, c.phi[j], c.signal[j], g, ex_);
        out[j].dist = dist_rate(w.dist, c.signal[j], g, ex_);
    }
}

void AgentController::rates(const Cascade& c, std::span<const StepWeights> weights, std::span<double> out) const
{
    std::size_t needed = 0;
    for (const auto& w : weights)
        needed += static_cast<std::size_t>(w.critic.size() + w.actor.size() + w.theta.size()) + 1;
    if (weights.size() != steps() || out.size() < needed)
        throw std::invalid_argument("rate buffer does not match the controller's weights");
    std::size_t off = 0;
    auto block = [&out, &off](Eigen::Index len) {
        Eigen::Map<Vector> m(out.data() + off, len);
        off += static_cast<std::size_t>(len);
        return m;
    };
    for (std::size_t j = 0; j < steps(); ++j) {
        const StepWeights& w = weights[j];
        const StepGains& g = gains_[j];
        critic_rate(w, c.s[j], c.signal[j], g, ex_, block(w.critic.size()));
        actor_rate(w, c.s[j], g, ex_, block(w.actor.size()));
        theta_rate(w.theta, c.phi[j], c.signal[j], g, ex_, block(w.theta.size()));
        out[off++] = dist_rate(w.dist, c.signal[j], g, ex_);
    }
}

}  // namespace fixcon
