#pragma once

#include "fixcon/adaptation.hpp"
#include "fixcon/rbfnet.hpp"

#include <optional>
#include <span>
#include <vector>

namespace fixcon {

struct NeighborOutput {
    double weight = 0.0;  // a_il
    double output = 0.0;  // y_l
};

struct LeaderLink {
    double weight = 0.0;            // b_i
    std::optional<double> output;   // y_0, required iff b_i > 0
};

/// e_i = sum_l a_il (y_i - y_l) + b_i (y_i - y_0)
double consensus_error(double own_output, std::span<const NeighborOutput> neighbors, const LeaderLink& leader);

/// Networks of one backstepping step: the shared critic/actor basis S over
/// the scalar step error, and the estimator basis Phi (over x_i1 at step 1,
/// over chi_ij afterwards).
struct StepNetworks {
    RbfBasis critic_actor;
    RbfBasis theta;
};

/// alpha_i1 = -(k/g) e - (1/g) Wa^T S(e)
///            + (1/g) (-k_p e^p - k_q e^q - theta^T phi(x_i1) - D^)
double virtual_control_step1(double e, double x1, const StepWeights& w, const StepNetworks& nets, double in_degree,
                             const StepGains& g, const Exponents& ex);

/// alpha_ij = -k z - Wa^T S(z) - k_p z^p - k_q z^q - theta^T Phi(chi) - d^ - z_prev_r
double virtual_control_stepj(double z, const StepWeights& w, const StepNetworks& nets, std::span<const double> chi,
                             double z_prev_r, const StepGains& g, const Exponents& ex);

/// chi_ij = [x_1..x_j, Wc_1..Wc_{j-1}, Wa_1..Wa_{j-1}, theta_1..theta_{j-1}, d_1..d_{j-1}]
std::vector<double> assemble_chi(std::span<const double> own_states, std::span<const StepWeights> prior);
void assemble_chi(std::span<const double> own_states, std::span<const StepWeights> prior, std::vector<double>& out);

std::size_t chi_dimension(std::size_t step, std::span<const StepNetworks> nets);

/// Everything agent i may use: its own state and weights, its neighbors'
/// outputs, and the leader output if pinned.
struct LocalInfo {
    std::span<const double> state;
    std::span<const StepWeights> weights;
    std::span<const NeighborOutput> neighbors;
    LeaderLink leader;
    double in_degree = 0.0;
};

/// One evaluation of the backstepping cascade.
///
/// signal[0] is the consensus error e_i (the step-1 learning signal);
/// signal[j] for j >= 1 is the virtual error z_{i,j+1} = x_{j+1} - alpha_j.
/// The S and Phi activations are kept so adaptation rates reuse them.
struct Cascade {
    double e = 0.0;
    std::vector<double> signal;
    std::vector<double> alpha;
    double u = 0.0;
    std::vector<Vector> s;
    std::vector<Vector> phi;
    std::vector<double> chi;  // estimator input of the last step
};

class AgentController {
public:
    AgentController(std::vector<StepNetworks> nets, std::vector<StepGains> gains, Exponents ex);

    std::size_t steps() const { return nets_.size(); }
    const std::vector<StepNetworks>& networks() const { return nets_; }
    const std::vector<StepGains>& gains() const { return gains_; }

    Cascade control(const LocalInfo& info) const;
    /// Same, reusing the buffers already held by `out`.
    void control(const LocalInfo& info, Cascade& out) const;

    /// Weight derivatives for every step, written into `rates` (same shapes
    /// as `weights`).
    void rates(const Cascade& c, std::span<const StepWeights> weights, std::span<StepWeights> rates) const;
    /// Same, written flat per step as [critic, actor, theta, dist].
    void rates(const Cascade& c, std::span<const StepWeights> weights, std::span<double> rates) const;

private:
    std::vector<StepNetworks> nets_;
    std::vector<StepGains> gains_;
    Exponents ex_;
};

}  // namespace fixcon
