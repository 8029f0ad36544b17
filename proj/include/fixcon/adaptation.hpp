#pragma once

#include "fixcon/rbfnet.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fixcon {

/// Sign-preserving power sgn(x)|x|^r. For odd-ratio r this is the real
/// branch of x^r.
double signed_pow(double x, double r);
Vector signed_pow(const Vector& x, double r);

/// Positive-definite adaptation gain: either scale * I or a full matrix.
class GainMatrix {
public:
    GainMatrix(double scale = 1.0) : scale_(scale) {}  // NOLINT(google-explicit-constructor)
    explicit GainMatrix(Eigen::MatrixXd full);

    bool is_scalar() const { return !full_.has_value(); }
    double scale() const { return scale_; }
    const std::optional<Eigen::MatrixXd>& full() const { return full_; }

    Vector apply(const Vector& v) const;
    /// v <- Gamma v
    void apply_in_place(Eigen::Ref<Vector> v) const;
    Vector apply_inverse(const Vector& v) const;
    /// Largest eigenvalue of the inverse gain.
    double max_inverse_eigenvalue() const;
    bool positive_definite() const;

private:
    double scale_ = 1.0;
    std::optional<Eigen::MatrixXd> full_;
};

struct Exponents {
    double p = 1.0 / 3.0;
    double q = 3.0;
};

/// Throws if p is not in (0,1), q is not > 1, or either is not a ratio of
/// odd integers (checked against denominators up to 999).
void check_exponents(const Exponents& ex);

/// Control and adaptation gains of one backstepping step.
struct StepGains {
    double k = 1.0;
    double k_p = 1.0;
    double k_q = 1.0;
    double sigma_1c = 1.0, sigma_2c = 1.0, sigma_3c = 1.0;
    double sigma_1a = 1.0, sigma_2a = 1.0, sigma_3a = 1.0;
    double sigma_1theta = 1.0, sigma_2theta = 1.0;
    double sigma_1d = 1.0, sigma_2d = 1.0;
    GainMatrix gamma_c{1.0};
    GainMatrix gamma_a{1.0};
    GainMatrix gamma_theta{1.0};
    double gamma_d = 1.0;
    double mu_d = 1.0;  // analysis constant, only used by validate_gains
};

/// Throws std::invalid_argument on negative or non-finite gains and on
/// non-positive-definite gain matrices. Zero gains are legal here and are
/// reported by validate_gains instead.
void check_gain_signs(const StepGains& g);

struct ControllerGains {
    /// gains[agent][step]
    std::vector<std::vector<StepGains>> per_agent;
    Exponents exponents;

    const StepGains& at(std::size_t agent, std::size_t step) const { return per_agent.at(agent).at(step); }
};

struct StepWeights {
    Vector critic;
    Vector actor;
    Vector theta;
    double dist = 0.0;  // D^ at step 1, d^ at later steps

    static StepWeights zeros(std::size_t neurons, std::size_t theta_neurons);
};

Vector critic_rate(const StepWeights& w, const Vector& activations, double error, const StepGains& g,
                   const Exponents& ex);
Vector actor_rate(const StepWeights& w, const Vector& activations, const StepGains& g, const Exponents& ex);
Vector theta_rate(const Vector& theta, const Vector& features, double error, const StepGains& g,
                  const Exponents& ex);
double dist_rate(double dist, double error, const StepGains& g, const Exponents& ex);

// Allocation-free forms used by the integrator; `out` must already have the
// weight vector's length.
void critic_rate(const StepWeights& w, const Vector& activations, double error, const StepGains& g,
                 const Exponents& ex, Eigen::Ref<Vector> out);
void actor_rate(const StepWeights& w, const Vector& activations, const StepGains& g, const Exponents& ex,
                Eigen::Ref<Vector> out);
void theta_rate(const Vector& theta, const Vector& features, double error, const StepGains& g, const Exponents& ex,
                Eigen::Ref<Vector> out);

struct GainCheck {
    std::string id;
    std::string condition;
    bool passed = true;
    std::string detail;
};

struct GainReport {
    std::size_t step = 1;  // 1-based
    std::vector<GainCheck> checks;

    std::vector<std::string> warnings() const;
    bool clean() const { return warnings().empty(); }
};

/// Sufficient conditions for the per-step Lyapunov bound. Violations are
/// warnings: the shipped examples converge without meeting them.
GainReport validate_gains(const StepGains& g, std::size_t step);

}  // namespace fixcon
