#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "derflow/opf.hpp"

namespace derflow {

enum class Policy { synchronous, feedback, feedback_fast, voltvar };

Policy policy_from_string(const std::string& s);
std::string to_string(Policy p);

struct ControllerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// State shared by the dispatch policies: aggregator-side primal/dual
/// iterates plus per-DER stale dual copies and last-delivery indices.
struct ControllerState {
    Eigen::VectorXd u;          // 2 Ng
    Eigen::VectorXd gamma, mu;  // M each
    std::vector<Eigen::VectorXd> stale_gamma, stale_mu;  // per DER, M each
    std::vector<long> last_delivery;                     // l_i, in tick units
    long k = 0;
};

ControllerState make_controller_state(const OpfInstance& inst, bool start_at_available_power);

/// Per-DER norm of the stale-dual gradient error at the step just taken,
/// || xi_i [(mu~_i - mu) - (gamma~_i - gamma)] ||_2.
Eigen::VectorXd stale_gradient_error(const ControllerState& st, const OpfInstance& inst);

/// Projected primal descent for every DER using its stale dual copies.
void primal_step_with_stale(ControllerState& st, const OpfInstance& inst);

/// Aggregator dual ascent from voltage measurements m over the monitored set.
void dual_step_from_measurements(ControllerState& st, const OpfInstance& inst,
                                 const Eigen::VectorXd& m);

/// Refresh stale copies for DERs with a successful delivery; bump k.
void deliver_duals(ControllerState& st, const std::vector<uint8_t>& delivered);

/// Local dual refinement: entry of the stale copies at the DER's own
/// monitored position, driven by the locally measured voltage magnitude.
void local_dual_update(ControllerState& st, const OpfInstance& inst, int der_index,
                       int monitored_position, double m_local);

/// Synchronous model-based step: primal with exact current duals, dual
/// ascent on the model-evaluated constraint functions (needs full loads).
void primal_dual_step(ControllerState& st, const OpfInstance& inst);

/// Measurement-feedback step with lossy dual broadcast. Returns the per-DER
/// stale-gradient error norms measured before the primal update.
Eigen::VectorXd feedback_step(ControllerState& st, const OpfInstance& inst,
                              const Eigen::VectorXd& m, const std::vector<uint8_t>& delivered);

/// Volt/VAr droop: Q = 0 at or below 1.0 pu, linear down to
/// -sqrt(s^2 - p_av^2) at 1.05 pu, saturated beyond. No curtailment.
double voltvar_setpoint_q(double m_local, const Capability& cap);

}  // namespace derflow
