#include "fixcon/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

namespace fixcon {

// ---------------------------------------------------------------------------
// RK4

Rk4Integrator::Rk4Integrator(std::size_t dim) : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

void Rk4Integrator::eval(const DerivativeFn& f, double t, std::span<const double> x, std::vector<double>& k)
{
    f(t, x, k);
    for (std::size_t i = 0; i < k.size(); ++i)
        if (!std::isfinite(k[i])) {
            std::ostringstream os;
            os << "non-finite derivative at t=" << t << " in component " << i;
            throw IntegrationError(os.str(), t, i);
        }
}

void Rk4Integrator::step(const DerivativeFn& f, std::span<double> x, double t, double dt)
{
    const std::size_t n = x.size();
    if (n != k1_.size())
        throw std::invalid_argument("integrator dimension mismatch");
    const double half = 0.5 * dt;

    eval(f, t, x, k1_);
    for (std::size_t i = 0; i < n; ++i)
        tmp_[i] = x[i] + half * k1_[i];
    eval(f, t + half, tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i)
        tmp_[i] = x[i] + half * k2_[i];
    eval(f, t + half, tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i)
        tmp_[i] = x[i] + dt * k3_[i];
    eval(f, t + dt, tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i)
        x[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
}

std::vector<double> rk4_step(const DerivativeFn& f, std::span<const double> x, double t, double dt)
{
    std::vector<double> out(x.begin(), x.end());
    Rk4Integrator(x.size()).step(f, out, t, dt);
    return out;
}

// ---------------------------------------------------------------------------
// Layout

StateLayout::StateLayout(std::size_t followers, std::size_t layers, std::vector<std::size_t> neurons,
                         std::vector<std::size_t> theta_neurons)
    : followers_(followers), layers_(layers), neurons_(std::move(neurons)), theta_neurons_(std::move(theta_neurons))
{
    if (neurons_.size() != layers_ || theta_neurons_.size() != layers_)
        throw std::invalid_argument("state layout needs neuron counts for every step");
    agent_block_ = layers_;
    for (std::size_t j = 0; j < layers_; ++j)
        agent_block_ += 2 * neurons_[j] + theta_neurons_[j] + 1;
    size_ = layers_ + followers_ * agent_block_;
}

std::size_t StateLayout::follower_offset(std::size_t i) const
{
    return layers_ + i * agent_block_;
}

std::size_t StateLayout::weights_offset(std::size_t i, std::size_t step) const
{
    std::size_t off = follower_offset(i) + layers_;
    for (std::size_t j = 0; j < step; ++j)
        off += 2 * neurons_[j] + theta_neurons_[j] + 1;
    return off;
}

std::optional<std::size_t> StateLayout::agent_of(std::size_t c) const
{
    if (c < layers_)
        return std::nullopt;
    return (c - layers_) / agent_block_;
}

std::string StateLayout::describe(std::size_t c) const
{
    std::ostringstream os;
    if (c >= size_)
        return "component " + std::to_string(c) + " (out of range)";
    if (c < layers_) {
        os << "leader x" << c + 1;
        return os.str();
    }
    const std::size_t i = *agent_of(c);
    std::size_t off = c - follower_offset(i);
    os << "follower " << i + 1 << " ";
    if (off < layers_) {
        os << "x" << off + 1;
        return os.str();
    }
    off -= layers_;
    for (std::size_t j = 0; j < layers_; ++j) {
        const std::size_t m = neurons_[j];
        const std::size_t mt = theta_neurons_[j];
        if (off < m) {
            os << "step " << j + 1 << " critic[" << off << "]";
            return os.str();
        }
        off -= m;
        if (off < m) {
            os << "step " << j + 1 << " actor[" << off << "]";
            return os.str();
        }
        off -= m;
        if (off < mt) {
            os << "step " << j + 1 << " theta[" << off << "]";
            return os.str();
        }
        off -= mt;
        if (off == 0) {
            os << "step " << j + 1 << " disturbance estimate";
            return os.str();
        }
        off -= 1;
    }
    return os.str();
}

std::vector<double> StateLayout::flatten(const SystemState& s) const
{
    if (s.leader.x.size() != layers_ || s.followers.size() != followers_ || s.weights.size() != followers_)
        throw std::invalid_argument("system state does not match layout");
    std::vector<double> flat;
    flat.reserve(size_);
    flat.insert(flat.end(), s.leader.x.begin(), s.leader.x.end());
    for (std::size_t i = 0; i < followers_; ++i) {
        if (s.followers[i].x.size() != layers_ || s.weights[i].size() != layers_)
            throw std::invalid_argument("follower state does not match layout");
        flat.insert(flat.end(), s.followers[i].x.begin(), s.followers[i].x.end());
        for (std::size_t j = 0; j < layers_; ++j) {
            const StepWeights& w = s.weights[i][j];
            if (static_cast<std::size_t>(w.critic.size()) != neurons_[j] ||
                static_cast<std::size_t>(w.actor.size()) != neurons_[j] ||
                static_cast<std::size_t>(w.theta.size()) != theta_neurons_[j])
                throw std::invalid_argument("step weights do not match layout");
            flat.insert(flat.end(), w.critic.begin(), w.critic.end());
            flat.insert(flat.end(), w.actor.begin(), w.actor.end());
            flat.insert(flat.end(), w.theta.begin(), w.theta.end());
            flat.push_back(w.dist);
        }
    }
    return flat;
}

SystemState StateLayout::unflatten(std::span<const double> flat, double t) const
{
    SystemState s;
    unflatten(flat, t, s);
    return s;
}

void StateLayout::unflatten(std::span<const double> flat, double t, SystemState& s) const
{
    if (flat.size() != size_)
        throw std::invalid_argument("flat state has " + std::to_string(flat.size()) + " entries, layout expects " +
                                    std::to_string(size_));
    s.t = t;
    auto it = flat.begin();
    auto take = [&it](std::size_t count, Vector& v) {
        v.resize(static_cast<Eigen::Index>(count));
        std::copy(it, it + static_cast<std::ptrdiff_t>(count), v.begin());
        it += static_cast<std::ptrdiff_t>(count);
    };
    auto take_std = [&it](std::size_t count, std::vector<double>& v) {
        v.assign(it, it + static_cast<std::ptrdiff_t>(count));
        it += static_cast<std::ptrdiff_t>(count);
    };
    take_std(layers_, s.leader.x);
    s.followers.resize(followers_);
    s.weights.resize(followers_);
    for (std::size_t i = 0; i < followers_; ++i) {
        take_std(layers_, s.followers[i].x);
        s.weights[i].resize(layers_);
        for (std::size_t j = 0; j < layers_; ++j) {
            StepWeights& w = s.weights[i][j];
            take(neurons_[j], w.critic);
            take(neurons_[j], w.actor);
            take(theta_neurons_[j], w.theta);
            w.dist = *it++;
        }
    }
}

// ---------------------------------------------------------------------------
// Config

void SimulationConfig::validate() const
{
    const std::size_t n_followers = topology.followers();
    if (followers.size() != n_followers)
        throw std::invalid_argument("configured " + std::to_string(followers.size()) + " follower models for " +
                                    std::to_string(n_followers) + " topology nodes");
    const std::size_t n = layers();
    for (const auto& m : followers)
        if (m.layers() != n)
            throw std::invalid_argument("all followers must have the same number of layers");
    if (leader.mode != LeaderMode::Reference) {
        if (!leader.model)
            throw std::invalid_argument("passive/active leader needs a plant model");
        if (leader.model->layers() != n)
            throw std::invalid_argument("leader and followers must have the same number of layers");
    }
    if (leader.mode == LeaderMode::Active && leader.tracking_gains.size() != n)
        throw std::invalid_argument("active leader needs one tracking gain per layer");
    if (gains.per_agent.size() != n_followers)
        throw std::invalid_argument("gains must be given for every follower");
    for (const auto& agent : gains.per_agent) {
        if (agent.size() != n)
            throw std::invalid_argument("gains must be given for every backstepping step");
        for (const auto& g : agent)
            check_gain_signs(g);
    }
    check_exponents(gains.exponents);
    if (!(dt > 0.0))
        throw std::invalid_argument("dt must be positive");
    if (!(dt < horizon))
        throw std::invalid_argument("dt must be smaller than the horizon");
    double previous = 0.0;
    for (const auto& ph : warmup) {
        if (!(ph.dt > 0.0) || !(ph.dt <= dt))
            throw std::invalid_argument("warm-up steps must be positive and no larger than dt");
        if (!(ph.until > previous) || !(ph.until < horizon))
            throw std::invalid_argument("warm-up phases must end in increasing order before the horizon");
        const double steps = (ph.until - previous) / ph.dt;
        if (std::abs(steps - std::round(steps)) > 1e-6)
            throw std::invalid_argument("each warm-up phase must span a whole number of its steps");
        previous = ph.until;
    }
    if (record_stride == 0)
        throw std::invalid_argument("record stride must be at least 1");
    if (leader.mode != LeaderMode::Reference && initial.leader.size() != n)
        throw std::invalid_argument("leader initial state needs " + std::to_string(n) + " entries");
    if (initial.followers.size() != n_followers)
        throw std::invalid_argument("initial conditions needed for every follower");
    for (const auto& x : initial.followers)
        if (x.size() != n)
            throw std::invalid_argument("follower initial state needs " + std::to_string(n) + " entries");
    if (critic_actor_basis.neurons == 0 || theta_basis.neurons == 0)
        throw std::invalid_argument("bases need at least one neuron");
    if (!(critic_actor_basis.width > 0.0) || !(theta_basis.width > 0.0))
        throw std::invalid_argument("basis widths must be positive");
}

std::vector<double> SimulationTrace::times() const
{
    std::vector<double> t;
    t.reserve(samples.size());
    for (const auto& s : samples)
        t.push_back(s.t);
    return t;
}

// ---------------------------------------------------------------------------
// Closed loop

namespace {

std::vector<StepNetworks> build_networks(const SimulationConfig& c)
{
    const std::size_t n = c.layers();
    const BasisSpec& ca = c.critic_actor_basis;
    const BasisSpec& th = c.theta_basis;
    std::vector<StepNetworks> nets;
    for (std::size_t j = 0; j < n; ++j) {
        RbfBasis s = RbfBasis::uniform(ca.neurons, ca.lo, ca.hi, ca.width, 1);
        // Step-1 estimator input is x_i1; later steps use chi_ij (diagonal centers).
        nets.push_back({s, RbfBasis::uniform(th.neurons, th.lo, th.hi, th.width, 1)});
        if (j > 0)
            nets.back().theta = RbfBasis::uniform(th.neurons, th.lo, th.hi, th.width, chi_dimension(j, nets));
    }
    return nets;
}

StateLayout build_layout(const SimulationConfig& c)
{
    const std::size_t n = c.layers();
    return StateLayout(c.topology.followers(), n, std::vector<std::size_t>(n, c.critic_actor_basis.neurons),
                       std::vector<std::size_t>(n, c.theta_basis.neurons));
}

const SimulationConfig& validated(const SimulationConfig& c)
{
    c.validate();
    return c;
}

}  // namespace

ClosedLoop::ClosedLoop(SimulationConfig config)
    : config_(std::move(validated(config))), bundle_(build_laplacian(config_.topology)), layout_(build_layout(config_))
{
    const auto nets = build_networks(config_);
    for (std::size_t i = 0; i < config_.topology.followers(); ++i) {
        if (!(bundle_.in_degree(static_cast<Eigen::Index>(i)) > 0.0))
            throw std::invalid_argument("follower " + std::to_string(i + 1) + " has no incoming link");
        controllers_.emplace_back(nets, config_.gains.per_agent[i], config_.gains.exponents);
    }
}

SystemState ClosedLoop::initial_state() const
{
    const auto& c = config_;
    const std::size_t n = c.layers();
    SystemState s;
    s.t = 0.0;
    s.leader.x = c.leader.mode == LeaderMode::Reference ? c.leader.state_at({}, 0.0, n) : c.initial.leader;
    for (std::size_t i = 0; i < c.topology.followers(); ++i) {
        AgentState a{c.initial.followers[i]};
        a.x[0] *= c.initial.output_scale;
        s.followers.push_back(std::move(a));
        std::vector<StepWeights> ws;
        for (std::size_t j = 0; j < n; ++j) {
            StepWeights w = StepWeights::zeros(layout_.neurons(j), layout_.theta_neurons(j));
            w.critic.setConstant(c.initial.weight_init);
            w.actor.setConstant(c.initial.weight_init);
            w.theta.setConstant(c.initial.weight_init);
            w.dist = c.initial.weight_init;
            ws.push_back(std::move(w));
        }
        s.weights.push_back(std::move(ws));
    }
    if (c.initial.align_virtual_controls)
        // alpha_ij only reads x_i1..x_ij, so layers can be filled in order.
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const std::vector<Cascade> cascades = controls(s);
            for (std::size_t i = 0; i < s.followers.size(); ++i)
                s.followers[i].x[j + 1] = cascades[i].alpha[j];
        }
    return s;
}

LocalInfo ClosedLoop::local_info(const SystemState& s, const std::vector<double>& leader_x, std::size_t i,
                                 std::vector<NeighborOutput>& scratch) const
{
    const Topology& topo = config_.topology;
    scratch.clear();
    for (std::size_t l = 0; l < topo.followers(); ++l)
        if (topo.weight(i, l) > 0.0)
            scratch.push_back({topo.weight(i, l), s.followers[l].output()});
    LeaderLink link{topo.pinning(i), std::nullopt};
    if (link.weight > 0.0)
        link.output = leader_x.at(0);
    return LocalInfo{s.followers[i].x, s.weights[i], scratch, link, bundle_.in_degree(static_cast<Eigen::Index>(i))};
}

std::vector<Cascade> ClosedLoop::controls(const SystemState& s) const
{
    Workspace ws;
    controls(s, ws);
    return std::move(ws.cascades);
}

void ClosedLoop::controls(const SystemState& s, Workspace& ws) const
{
    const auto leader_x = config_.leader.state_at(s.leader.x, s.t, config_.layers());
    ws.cascades.resize(controllers_.size());
    for (std::size_t i = 0; i < controllers_.size(); ++i)
        controllers_[i].control(local_info(s, leader_x, i, ws.neighbors), ws.cascades[i]);
}

void ClosedLoop::derivative(double t, std::span<const double> x, std::span<double> dx) const
{
    Workspace ws;
    derivative(t, x, dx, ws);
}

void ClosedLoop::derivative(double t, std::span<const double> x, std::span<double> dx, Workspace& ws) const
{
    if (dx.size() != x.size())
        throw std::invalid_argument("derivative buffer does not match the state");
    layout_.unflatten(x, t, ws.state);
    const std::size_t n = config_.layers();

    config_.leader.derivative(x.first(n), t, dx.first(n));

    controls(ws.state, ws);
    for (std::size_t i = 0; i < controllers_.size(); ++i) {
        const std::size_t off = layout_.follower_offset(i);
        const Cascade& c = ws.cascades[i];
        config_.followers[i].derivative(x.subspan(off, n), c.u, t, dx.subspan(off, n));
        const std::size_t w_off = layout_.weights_offset(i, 0);
        const std::size_t w_end = i + 1 < controllers_.size() ? layout_.follower_offset(i + 1) : layout_.size();
        controllers_[i].rates(c, ws.state.weights[i], dx.subspan(w_off, w_end - w_off));
    }
}

TraceSample ClosedLoop::sample(const SystemState& s) const
{
    TraceSample ts;
    ts.t = s.t;
    ts.leader_state = config_.leader.state_at(s.leader.x, s.t, config_.layers());
    const std::vector<Cascade> cascades = controls(s);
    for (std::size_t i = 0; i < cascades.size(); ++i) {
        ts.states.push_back(s.followers[i].x);
        ts.e.push_back(cascades[i].e);
        ts.u.push_back(cascades[i].u);
        ts.signal.push_back(cascades[i].signal);
        ts.alpha.push_back(cascades[i].alpha);
    }
    ts.weights = s.weights;
    return ts;
}

SimulationTrace simulate(const SimulationConfig& config)
{
    const ClosedLoop loop(config);
    const StateLayout& layout = loop.layout();

    // Phase 1 (optional warm-up) and phase 2 share the recording interval
    // dt * record_stride.
    struct Phase {
        double t0;
        double dt;
        std::size_t steps;
        std::size_t stride;
    };
    std::vector<Phase> phases;
    double t_main = 0.0;
    const double record_interval = config.dt * static_cast<double>(config.record_stride);
    for (const auto& w : config.warmup) {
        const auto steps = static_cast<std::size_t>(std::llround((w.until - t_main) / w.dt));
        const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(record_interval / w.dt)));
        phases.push_back({t_main, w.dt, steps, stride});
        t_main = w.until;
    }
    phases.push_back({t_main, config.dt,
                      static_cast<std::size_t>(std::llround((config.horizon - t_main) / config.dt)),
                      config.record_stride});

    SimulationTrace trace;
    trace.followers = layout.followers();
    trace.layers = layout.layers();
    std::size_t expected = 2;
    for (const auto& ph : phases)
        expected += ph.steps / ph.stride + 1;
    trace.samples.reserve(expected);

    std::vector<double> x = layout.flatten(loop.initial_state());
    Rk4Integrator rk4(x.size());
    ClosedLoop::Workspace ws;
    const DerivativeFn f = [&loop, &ws](double t, std::span<const double> xs, std::span<double> dx) {
        loop.derivative(t, xs, dx, ws);
    };

    trace.samples.push_back(loop.sample(layout.unflatten(x, 0.0)));
    for (std::size_t p = 0; p < phases.size(); ++p) {
        const Phase& ph = phases[p];
        const bool last_phase = p + 1 == phases.size();
        for (std::size_t k = 0; k < ph.steps; ++k) {
            const double t = ph.t0 + static_cast<double>(k) * ph.dt;
            try {
                rk4.step(f, x, t, ph.dt);
            } catch (const IntegrationError& err) {
                throw IntegrationError("integration failure at t=" + std::to_string(err.time()) + ": " +
                                           layout.describe(err.component()) + " has a non-finite derivative",
                                       err.time(), err.component());
            }
            const double t_next = ph.t0 + static_cast<double>(k + 1) * ph.dt;
            for (std::size_t c = 0; c < x.size(); ++c)
                if (!(std::abs(x[c]) <= config.divergence_limit))
                    throw IntegrationError("divergence at t=" + std::to_string(t_next) + ": " + layout.describe(c) +
                                               " = " + std::to_string(x[c]),
                                           t_next, c);
            if ((k + 1) % ph.stride == 0 || (last_phase && k + 1 == ph.steps))
                trace.samples.push_back(loop.sample(layout.unflatten(x, t_next)));
        }
    }
    return trace;
}

std::vector<BatchResult> batch_simulate(const std::vector<SimulationConfig>& configs, std::size_t max_threads)
{
    std::vector<BatchResult> results(configs.size());
    if (max_threads == 0)
        max_threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());

    auto run_one = [&configs, &results](std::size_t idx) {
        try {
            results[idx].trace = simulate(configs[idx]);
        } catch (const std::exception& ex) {
            results[idx].error = ex.what();
        }
    };

    for (std::size_t start = 0; start < configs.size(); start += max_threads) {
        const std::size_t end = std::min(configs.size(), start + max_threads);
        std::vector<std::future<void>> jobs;
        for (std::size_t idx = start; idx < end; ++idx)
            jobs.push_back(std::async(std::launch::async, run_one, idx));
        for (auto& j : jobs)
            j.get();
    }
    return results;
}

}  // namespace fixcon
