#include "fixcon/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fixcon {

namespace {

Factor sin_of(std::size_t var, double scale = 1.0, double offset = 0.0, int power = 1)
{
    return Factor{FactorFn::Sin, var, scale, offset, power};
}

Factor cos_of(std::size_t var, double scale = 1.0, double offset = 0.0, int power = 1)
{
    return Factor{FactorFn::Cos, var, scale, offset, power};
}

Factor state(std::size_t var, int power = 1)
{
    return Factor{FactorFn::Identity, var, 1.0, 0.0, power};
}

// Parameters a_i, b_i, c_i, d_i of the second example's followers.
constexpr std::array<double, 4> kExample2A{1.5, -0.8, 0.6, -1.3};
constexpr std::array<double, 4> kExample2B{-0.8, 0.4, -0.7, 0.8};
constexpr std::array<double, 4> kExample2C{0.7, 1.4, -1.5, -1.2};
constexpr std::array<double, 4> kExample2D{0.5, -0.6, 1.1, -1.9};

std::vector<Expression> example2_layers(int index)
{
    if (index < 1 || index > 4)
        throw std::invalid_argument("example2 follower index must be in 1..4, got " + std::to_string(index));
    const auto i = static_cast<std::size_t>(index - 1);
    // f1 = -a cos^2(x1) + b sin(x1);  f2 = -c x2 sin(x1) + d cos(x2)
    Expression f1({Term{-kExample2A[i], {cos_of(0, 1.0, 0.0, 2)}}, Term{kExample2B[i], {sin_of(0)}}});
    Expression f2({Term{-kExample2C[i], {state(1), sin_of(0)}}, Term{kExample2D[i], {cos_of(1)}}});
    return {f1, f2};
}

}  // namespace

StrictFeedbackModel::StrictFeedbackModel(std::vector<Expression> layer_fns, std::vector<Expression> disturbances,
                                         std::vector<std::optional<double>> declared_magnitude,
                                         std::vector<std::optional<double>> declared_rate)
    : layer_fns_(std::move(layer_fns)),
      disturbances_(std::move(disturbances)),
      declared_magnitude_(std::move(declared_magnitude)),
      declared_rate_(std::move(declared_rate))
{
    const std::size_t n = layer_fns_.size();
    if (n == 0)
        throw std::invalid_argument("a strict-feedback model needs at least one layer");
    if (disturbances_.empty())
        disturbances_.resize(n);
    if (disturbances_.size() != n)
        throw std::invalid_argument("disturbance count " + std::to_string(disturbances_.size()) +
                                    " does not match layer count " + std::to_string(n));
    declared_magnitude_.resize(n);
    declared_rate_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (layer_fns_[k].max_variable() > static_cast<int>(k))
            throw std::invalid_argument("layer " + std::to_string(k + 1) + " function reads x" +
                                        std::to_string(layer_fns_[k].max_variable() + 1) +
                                        ", violating strict-feedback structure");
        if (disturbances_[k].max_variable() > 0)
            throw std::invalid_argument("disturbance of layer " + std::to_string(k + 1) +
                                        " may only depend on time");
    }
}

double StrictFeedbackModel::layer_fn(std::size_t k, std::span<const double> x) const
{
    if (k >= layers())
        throw std::out_of_range("layer index out of range");
    return layer_fns_[k](x.first(std::min(x.size(), k + 1)));
}

void StrictFeedbackModel::derivative(std::span<const double> x, double u, double t, std::span<double> dx) const
{
    const std::size_t n = layers();
    if (x.size() != n || dx.size() != n)
        throw std::invalid_argument("state dimension " + std::to_string(x.size()) + " does not match " +
                                    std::to_string(n) + " layers");
    for (std::size_t k = 0; k < n; ++k) {
        const double drive = (k + 1 < n) ? x[k + 1] : u;
        dx[k] = drive + layer_fns_[k](x.first(k + 1)) + disturbances_[k](t);
    }
}

std::vector<double> StrictFeedbackModel::derivative(const AgentState& s, double u, double t) const
{
    std::vector<double> dx(s.x.size());
    derivative(s.x, u, t, dx);
    return dx;
}

DisturbanceBounds StrictFeedbackModel::disturbance_bounds(double horizon, std::size_t samples) const
{
    if (horizon <= 0.0 || samples < 2)
        throw std::invalid_argument("disturbance sampling needs a positive horizon and at least two samples");
    const std::size_t n = layers();
    DisturbanceBounds out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    const double h = horizon / static_cast<double>(samples - 1);
    const double fd = std::min(1e-5, h);
    for (std::size_t k = 0; k < n; ++k) {
        double mag = 0.0;
        double rate = 0.0;
        for (std::size_t s = 0; s < samples; ++s) {
            const double t = h * static_cast<double>(s);
            mag = std::max(mag, std::abs(disturbances_[k](t)));
            rate = std::max(rate, std::abs(disturbances_[k](t + fd) - disturbances_[k](t - fd)) / (2.0 * fd));
        }
        // Strict inequality |d| < d_bar: pad the sampled supremum.
        out.magnitude[k] = declared_magnitude_[k].value_or(mag * (1.0 + 1e-6) + 1e-12);
        out.rate[k] = declared_rate_[k].value_or(rate * (1.0 + 1e-6) + 1e-12);
    }
    return out;
}

std::vector<std::size_t> StrictFeedbackModel::violated_bounds(double horizon, std::size_t samples) const
{
    std::vector<std::size_t> bad;
    std::vector<std::optional<double>> none(layers());
    StrictFeedbackModel undeclared(layer_fns_, disturbances_, none, none);
    const DisturbanceBounds sampled = undeclared.disturbance_bounds(horizon, samples);
    for (std::size_t k = 0; k < layers(); ++k) {
        const bool mag_bad = declared_magnitude_[k] && *declared_magnitude_[k] < sampled.magnitude[k] * (1.0 - 2e-6);
        const bool rate_bad = declared_rate_[k] && *declared_rate_[k] < sampled.rate[k] * (1.0 - 1e-4);
        if (mag_bad || rate_bad)
            bad.push_back(k);
    }
    return bad;
}

ReferenceSignal::ReferenceSignal(double offset, std::vector<Component> components)
    : offset_(offset), components_(std::move(components))
{
}

ReferenceSignal ReferenceSignal::cosine(double amplitude, double omega)
{
    return ReferenceSignal(0.0, {{amplitude, omega, 0.0}});
}

ReferenceSignal ReferenceSignal::sine(double amplitude, double omega)
{
    return ReferenceSignal(0.0, {{amplitude, omega, -std::numbers::pi / 2.0}});
}

double ReferenceSignal::derivative(std::size_t order, double t) const
{
    double v = (order == 0) ? offset_ : 0.0;
    for (const auto& c : components_) {
        // d^k/dt^k A cos(w t + phi) = A w^k cos(w t + phi + k pi/2)
        const double k = static_cast<double>(order);
        v += c.amplitude * std::pow(c.omega, k) * std::cos(c.omega * t + c.phase + k * std::numbers::pi / 2.0);
    }
    return v;
}

std::vector<double> LeaderSpec::state_at(std::span<const double> integrated, double t, std::size_t layers) const
{
    if (mode != LeaderMode::Reference)
        return {integrated.begin(), integrated.end()};
    std::vector<double> x(layers);
    for (std::size_t k = 0; k < layers; ++k)
        x[k] = reference.derivative(k, t);
    return x;
}

double LeaderSpec::control(std::span<const double> x, double t) const
{
    if (mode != LeaderMode::Active)
        return 0.0;
    const std::size_t n = x.size();
    if (tracking_gains.size() != n)
        throw std::invalid_argument("active leader needs one tracking gain per layer");
    double u = reference.derivative(n, t) - model->layer_fn(n - 1, x);
    for (std::size_t k = 0; k < n; ++k)
        u += tracking_gains[k] * (reference.derivative(k, t) - x[k]);
    return u;
}

void LeaderSpec::derivative(std::span<const double> x, double t, std::span<double> dx) const
{
    if (mode == LeaderMode::Reference) {
        std::fill(dx.begin(), dx.end(), 0.0);
        return;
    }
    model->derivative(x, control(x, t), t, dx);
}

double LeaderSpec::layer_fn(std::size_t k, std::span<const double> x) const
{
    return mode == LeaderMode::Reference ? 0.0 : model->layer_fn(k, x);
}

double LeaderSpec::disturbance(std::size_t k, double t) const
{
    return mode == LeaderMode::Reference ? 0.0 : model->disturbance(k, t);
}

StrictFeedbackModel builtin_model(std::string_view name, int index)
{
    if (name == "example1_leader") {
        Expression f2({Term{50.0, {sin_of(1)}}});
        Expression d2({Term{1.0, {cos_of(0)}}});
        return StrictFeedbackModel({Expression{}, f2}, {Expression{}, d2});
    }
    if (name == "example1_follower") {
        Expression f2({Term{50.0, {sin_of(1)}}});
        Expression d2({Term{2.0, {sin_of(0)}}, Term{2.0, {}}});
        return StrictFeedbackModel({Expression{}, f2}, {Expression{}, d2});
    }
    if (name == "example2_follower")
        return StrictFeedbackModel(example2_layers(index), {Expression{}, Expression{}});
    if (name == "example3_follower") {
        Expression d1({Term{1.0, {sin_of(0)}}});
        Expression d2({Term{1.0, {cos_of(0, 0.5)}}});
        return StrictFeedbackModel(example2_layers(index), {d1, d2});
    }
    if (name == "example2_leader_reference" || name == "example1_active_reference")
        throw std::invalid_argument(std::string(name) + " is a reference signal, not a plant model");
    throw std::invalid_argument("unknown built-in model '" + std::string(name) + "'");
}

ReferenceSignal builtin_reference(std::string_view name)
{
    if (name == "example2_leader_reference")
        return ReferenceSignal::cosine(2.0, 0.6);
    if (name == "example1_active_reference")
        return ReferenceSignal::sine(10.0, 2.0 * std::numbers::pi / 5.0);
    throw std::invalid_argument("unknown built-in reference '" + std::string(name) + "'");
}

}  // namespace fixcon
