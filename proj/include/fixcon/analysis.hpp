#pragma once

#include "fixcon/adaptation.hpp"
#include "fixcon/simulate.hpp"

#include <optional>
#include <vector>

namespace fixcon {

/// T_max = 1/(k_p (1-p)) + 1/(k_q (q-1)). Throws on k_p, k_q <= 0, p >= 1
/// or q <= 1. An infinite k_p drops the first term.
double tmax_bound(double k_p, double k_q, double p, double q);

struct FixedTimeBound {
    double t_max = 0.0;
    double k_p_eff = 0.0;
    double k_q_eff = 0.0;
    double p = 0.0;
    double q = 0.0;
};

/// Aggregated constants of the whole closed loop with n layers and N
/// followers, from the smallest per-step k_p, k_q:
///   k_p_eff = 2^{(p+1)/2} min k_p
///   k_q_eff = 2^{(q+1)/2} (nN)^{1-(q+1)/2} min k_q
/// `stated` evaluates T_max with the raw exponents p, q; `derived` uses
/// (p+1)/2 and (q+1)/2, which is what the Lyapunov inequality actually has.
/// Both are infinite when some step has k_p = 0 or k_q = 0.
struct AggregatedBounds {
    FixedTimeBound stated;
    FixedTimeBound derived;
};

AggregatedBounds aggregated_bound(const ControllerGains& gains, std::size_t layers, std::size_t followers);

/// Per-agent first time after which |y_i - y_0| stays below `threshold`
/// until the end of the trace; nullopt when the last sample is still out.
std::vector<std::optional<double>> settling_time(const SimulationTrace& trace, double threshold = 0.1);

/// Same rule on a single error series sampled at `times`.
std::optional<double> settling_time(const std::vector<double>& times, const std::vector<double>& error,
                                    double threshold);

struct ConvergenceRadii {
    double omega_e = 0.0;
    double omega_z = 0.0;
    double c_aggregate = 0.0;
    double vartheta = 0.0;
};

/// Omega_e = sqrt(2 min{(C/((1-v) k_p))^p, (C/((1-v) k_q))^q}),
/// Omega_z = Omega_e / lambda_min.
ConvergenceRadii omega_radii(double c, double k_p, double k_q, double p, double q, double vartheta,
                             double lambda_min);

/// Inverse of omega_radii in C: the aggregate constant that would produce
/// an observed consensus radius.
double back_solve_c(double omega_e, double k_p, double k_q, double p, double q, double vartheta);

struct LyapunovSeries {
    std::vector<double> t;
    std::vector<double> v;
    std::vector<double> envelope;  // max of v over [t, end]
    /// Fraction of consecutive sample pairs, before v first drops to
    /// `terminal_level`, over which v does not increase. 1.0 means monotone.
    double envelope_monotone_fraction = 1.0;
};

/// V(t) with the given weights standing in for the ideal ones. Pass
/// `trace.samples.back().weights` for the trace-final proxy.
LyapunovSeries lyapunov_diagnostic(const SimulationTrace& trace, const ControllerGains& gains,
                                   const std::vector<std::vector<StepWeights>>& proxy_ideal, double terminal_level = 0.0);

/// Single-agent V evaluation used by lyapunov_diagnostic.
double lyapunov_value(std::span<const double> signal, std::span<const StepWeights> weights,
                      std::span<const StepWeights> proxy, std::span<const StepGains> gains);

struct TruthF1 {
    double f = 0.0;
    double d = 0.0;
};

/// Unknown lumped terms of agent i's consensus-error dynamics, computed
/// with simulator-side knowledge of every model:
///   F_i1 = g_i f_i1 - sum a_il (x_l2 + f_l1) - b_i (x_02 + f_01)
///   D_i1 = g_i d_i1 - sum a_il d_l1 - b_i d_01
TruthF1 truth_oracle_f1(const SystemState& state, const Topology& topology, const LeaderSpec& leader,
                        const std::vector<StrictFeedbackModel>& models, std::size_t agent, double t);

/// max over samples of |e - L~ z_1|_inf.
double structural_identity_residual(const SimulationTrace& trace, const Eigen::MatrixXd& ltilde);

/// Observed convergence exponent from three step sizes h, h/2, h/4 and the
/// corresponding final states: log2(|x_h - x_{h/2}| / |x_{h/2} - x_{h/4}|).
double convergence_exponent(const std::vector<double>& coarse, const std::vector<double>& mid,
                            const std::vector<double>& fine);

}  // namespace fixcon
