#pragma once

#include "fixcon/expression.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace fixcon {

struct AgentState {
    std::vector<double> x;

    double output() const { return x.at(0); }
};

struct DisturbanceBounds {
    std::vector<double> magnitude;  // d_bar per layer
    std::vector<double> rate;       // d_bar_d per layer
};

/// Strict-feedback plant
///
///   x_k' = x_{k+1} + f_k(x_1..x_k) + d_k(t),   k < n
///   x_n' = u       + f_n(x_1..x_n) + d_n(t)
///
/// Layer functions are validated on construction so that f_k never reads a
/// state beyond x_k.
class StrictFeedbackModel {
public:
    StrictFeedbackModel(std::vector<Expression> layer_fns, std::vector<Expression> disturbances,
                        std::vector<std::optional<double>> declared_magnitude = {},
                        std::vector<std::optional<double>> declared_rate = {});

    std::size_t layers() const { return layer_fns_.size(); }

    double layer_fn(std::size_t k, std::span<const double> x) const;
    double disturbance(std::size_t k, double t) const { return disturbances_.at(k)(t); }

    const Expression& layer_expression(std::size_t k) const { return layer_fns_.at(k); }
    const Expression& disturbance_expression(std::size_t k) const { return disturbances_.at(k); }

    void derivative(std::span<const double> x, double u, double t, std::span<double> dx) const;
    std::vector<double> derivative(const AgentState& state, double u, double t) const;

    /// Declared bounds where present, otherwise estimated by dense sampling
    /// over [0, horizon] (rates by central differences).
    DisturbanceBounds disturbance_bounds(double horizon, std::size_t samples = 20001) const;

    /// Checks declared bounds against sampled values; returns the layers
    /// whose declared bound is violated.
    std::vector<std::size_t> violated_bounds(double horizon, std::size_t samples = 20001) const;

private:
    std::vector<Expression> layer_fns_;
    std::vector<Expression> disturbances_;
    std::vector<std::optional<double>> declared_magnitude_;
    std::vector<std::optional<double>> declared_rate_;
};

/// Sum of sinusoids A cos(w t + phi) plus an offset, with exact derivatives.
class ReferenceSignal {
public:
    struct Component {
        double amplitude = 0.0;
        double omega = 0.0;
        double phase = 0.0;
    };

    ReferenceSignal() = default;
    ReferenceSignal(double offset, std::vector<Component> components);

    static ReferenceSignal cosine(double amplitude, double omega);
    static ReferenceSignal sine(double amplitude, double omega);

    /// order-th time derivative at t (order 0 is the signal itself).
    double derivative(std::size_t order, double t) const;
    double operator()(double t) const { return derivative(0, t); }

    double offset() const { return offset_; }
    const std::vector<Component>& components() const { return components_; }

private:
    double offset_ = 0.0;
    std::vector<Component> components_;
};

enum class LeaderMode { Passive, Active, Reference };

/// The leader agent. Passive leaders run their plant with u0 = 0, active
/// leaders use a feedback-linearizing law onto `reference` that treats the
/// leader as an integrator chain with known top-layer nonlinearity. A
/// reference leader has no plant: its k-th state is the (k-1)-th derivative
/// of `reference`.
struct LeaderSpec {
    LeaderMode mode = LeaderMode::Passive;
    std::optional<StrictFeedbackModel> model;
    ReferenceSignal reference;
    std::vector<double> tracking_gains{20.0, 10.0};

    /// Effective leader state at time t given the integrated leader state
    /// (ignored in reference mode).
    std::vector<double> state_at(std::span<const double> integrated, double t, std::size_t layers) const;
    double control(std::span<const double> x, double t) const;
    void derivative(std::span<const double> x, double t, std::span<double> dx) const;

    double layer_fn(std::size_t k, std::span<const double> x) const;
    double disturbance(std::size_t k, double t) const;
};

/// Plant models from the shipped examples. Names: example1_leader,
/// example1_follower, example2_follower (index 1..4), example3_follower
/// (index 1..4).
StrictFeedbackModel builtin_model(std::string_view name, int index = 0);

/// Reference signals: example2_leader_reference (2 cos 0.6t) and
/// example1_active_reference (10 sin(2 pi t / 5)).
ReferenceSignal builtin_reference(std::string_view name);

}  // namespace fixcon
