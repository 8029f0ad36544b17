#pragma once

#include "fixcon/adaptation.hpp"
#include "fixcon/controller.hpp"
#include "fixcon/dynamics.hpp"
#include "fixcon/topology.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fixcon {

// ---------------------------------------------------------------------------
// Integrator

using DerivativeFn = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double time, std::size_t component)
        : std::runtime_error(what), time_(time), component_(component)
    {
    }
    double time() const { return time_; }
    std::size_t component() const { return component_; }

private:
    double time_;
    std::size_t component_;
};

/// Classical RK4 with reusable stage buffers. Non-autonomous: stages are
/// evaluated at t, t + dt/2, t + dt/2, t + dt.
class Rk4Integrator {
public:
    explicit Rk4Integrator(std::size_t dim);

    /// Advances x in place; throws IntegrationError on a non-finite stage.
    void step(const DerivativeFn& f, std::span<double> x, double t, double dt);

private:
    void eval(const DerivativeFn& f, double t, std::span<const double> x, std::vector<double>& k);

    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

std::vector<double> rk4_step(const DerivativeFn& f, std::span<const double> x, double t, double dt);

// ---------------------------------------------------------------------------
// System state

struct SystemState {
    AgentState leader;
    std::vector<AgentState> followers;
    std::vector<std::vector<StepWeights>> weights;  // [follower][step]
    double t = 0.0;
};

/// Offsets of every block of the flat ODE state vector:
/// [leader x | follower 1 x | follower 1 step 1 (Wc, Wa, theta, d) | ... ].
class StateLayout {
public:
    StateLayout(std::size_t followers, std::size_t layers, std::vector<std::size_t> neurons,
                std::vector<std::size_t> theta_neurons);

    std::size_t followers() const { return followers_; }
    std::size_t layers() const { return layers_; }
    std::size_t size() const { return size_; }
    std::size_t neurons(std::size_t step) const { return neurons_.at(step); }
    std::size_t theta_neurons(std::size_t step) const { return theta_neurons_.at(step); }

    std::size_t follower_offset(std::size_t i) const;
    std::size_t weights_offset(std::size_t i, std::size_t step) const;

    /// Human-readable name of a flat component, e.g. "follower 2 x1".
    std::string describe(std::size_t component) const;
    /// Follower index owning a flat component, or nullopt for the leader.
    std::optional<std::size_t> agent_of(std::size_t component) const;

    std::vector<double> flatten(const SystemState& s) const;
    SystemState unflatten(std::span<const double> flat, double t) const;
    /// Same, reusing the storage of `out` when it already has this shape.
    void unflatten(std::span<const double> flat, double t, SystemState& out) const;

private:
    std::size_t followers_;
    std::size_t layers_;
    std::vector<std::size_t> neurons_;
    std::vector<std::size_t> theta_neurons_;
    std::size_t agent_block_ = 0;
    std::size_t size_ = 0;
};

// ---------------------------------------------------------------------------
// Configuration and trace

struct BasisSpec {
    std::size_t neurons = 3;
    double lo = -2.0;
    double hi = 2.0;
    double width = 1.0;
};

struct InitialConditions {
    std::vector<double> leader;
    std::vector<std::vector<double>> followers;
    double weight_init = 0.0;
    /// Multiplies every follower's initial output x_i1 (initial-condition sweeps).
    double output_scale = 1.0;
    /// Overwrite x_i2..x_in so that every virtual error z_ij (j >= 2) starts
    /// at zero. Keeps large-output sweeps from starting with an enormous
    /// z_i2 that no fixed explicit step can resolve.
    bool align_virtual_controls = false;
};

struct SimulationConfig {
    Topology topology;
    LeaderSpec leader;
    std::vector<StrictFeedbackModel> followers;
    ControllerGains gains;
    BasisSpec critic_actor_basis;
    BasisSpec theta_basis;
    double dt = 1e-3;
    double horizon = 1.0;
    /// Optional leading phases with smaller fixed steps: phase k covers
    /// [until_{k-1}, until_k) with step dt_k, then `dt` takes over up to the
    /// horizon. Used for very large initial errors, where the cubic feedback
    /// terms are briefly much stiffer than at steady state.
    struct StepPhase {
        double dt = 0.0;
        double until = 0.0;
    };
    std::vector<StepPhase> warmup;
    InitialConditions initial;
    std::size_t record_stride = 1;
    double divergence_limit = 1e9;

    std::size_t layers() const { return followers.empty() ? 0 : followers.front().layers(); }
    /// Throws std::invalid_argument on inconsistent dimensions or step sizes.
    void validate() const;
};

struct TraceSample {
    double t = 0.0;
    std::vector<double> leader_state;
    std::vector<std::vector<double>> states;  // [follower][layer]
    std::vector<double> e;                    // consensus errors
    std::vector<double> u;                    // control inputs
    std::vector<std::vector<double>> signal;  // cascade signals, see Cascade
    std::vector<std::vector<double>> alpha;   // virtual controls
    std::vector<std::vector<StepWeights>> weights;

    double leader_output() const { return leader_state.at(0); }
    double output(std::size_t i) const { return states.at(i).at(0); }
    double tracking_error(std::size_t i) const { return output(i) - leader_output(); }
};

struct SimulationTrace {
    std::size_t followers = 0;
    std::size_t layers = 0;
    std::vector<TraceSample> samples;

    std::vector<double> times() const;
};

/// The coupled plant/controller/adaptation ODE of one configuration.
class ClosedLoop {
public:
    explicit ClosedLoop(SimulationConfig config);

    const SimulationConfig& config() const { return config_; }
    const StateLayout& layout() const { return layout_; }
    const LaplacianBundle& laplacian() const { return bundle_; }
    const AgentController& controller(std::size_t i) const { return controllers_.at(i); }

    SystemState initial_state() const;

    /// Scratch buffers for one caller of derivative(); not shareable between
    /// threads.
    struct Workspace {
        SystemState state;
        std::vector<Cascade> cascades;
        std::vector<NeighborOutput> neighbors;
    };

    /// Synchronous control evaluation: every follower reads the same output
    /// snapshot. Only outputs cross agent boundaries.
    std::vector<Cascade> controls(const SystemState& s) const;
    void controls(const SystemState& s, Workspace& ws) const;

    void derivative(double t, std::span<const double> x, std::span<double> dx) const;
    void derivative(double t, std::span<const double> x, std::span<double> dx, Workspace& ws) const;

    TraceSample sample(const SystemState& s) const;

private:
    LocalInfo local_info(const SystemState& s, const std::vector<double>& leader_x, std::size_t i,
                         std::vector<NeighborOutput>& scratch) const;

    SimulationConfig config_;
    LaplacianBundle bundle_;
    StateLayout layout_;
    std::vector<AgentController> controllers_;
};

SimulationTrace simulate(const SimulationConfig& config);

struct BatchResult {
    std::optional<SimulationTrace> trace;
    std::string error;

    bool ok() const { return trace.has_value(); }
};

/// Independent runs, possibly concurrent; results are in input order.
std::vector<BatchResult> batch_simulate(const std::vector<SimulationConfig>& configs, std::size_t max_threads = 0);

}  // namespace fixcon
