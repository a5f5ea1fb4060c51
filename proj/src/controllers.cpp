#include "derflow/controllers.hpp"

namespace derflow {

Policy policy_from_string(const std::string& s) {
    if (s == "synchronous") return Policy::synchronous;
    if (s == "feedback") return Policy::feedback;
    if (s == "feedback-fast" || s == "feedback_fast") return Policy::feedback_fast;
    if (s == "voltvar") return Policy::voltvar;
    throw ControllerError("unknown policy '" + s + "'");
}

std::string to_string(Policy p) {
    switch (p) {
        case Policy::synchronous: return "synchronous";
        case Policy::feedback: return "feedback";
        case Policy::feedback_fast: return "feedback-fast";
        case Policy::voltvar: return "voltvar";
    }
    return "?";
}

ControllerState make_controller_state(const OpfInstance& inst, bool start_at_available_power) {
    ControllerState st;
    const int n = inst.ng(), m = inst.m();
    st.u.resize(2 * n);
    for (int i = 0; i < n; ++i) {
        Eigen::Vector2d u0 = start_at_available_power
                                 ? Eigen::Vector2d(inst.caps[i].p_av, 0.0)
                                 : Eigen::Vector2d::Zero();
        st.u.segment<2>(2 * i) = project_capability(inst.caps[i], u0);
    }
    st.gamma = Eigen::VectorXd::Zero(m);
    st.mu = Eigen::VectorXd::Zero(m);
    st.stale_gamma.assign(n, Eigen::VectorXd::Zero(m));
    st.stale_mu.assign(n, Eigen::VectorXd::Zero(m));
    st.last_delivery.assign(n, 0);
    st.k = 0;
    return st;
}

Eigen::VectorXd stale_gradient_error(const ControllerState& st, const OpfInstance& inst) {
    const int n = inst.ng();
    Eigen::VectorXd err(n);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd d =
            (st.stale_mu[i] - st.mu) - (st.stale_gamma[i] - st.gamma);
        err(i) = Eigen::Vector2d(inst.Rg.col(i).dot(d), inst.Bg.col(i).dot(d)).norm();
    }
    return err;
}

void primal_step_with_stale(ControllerState& st, const OpfInstance& inst) {
    for (int i = 0; i < inst.ng(); ++i) {
        Eigen::Vector2d ui = st.u.segment<2>(2 * i);
        ui -= inst.reg.alpha *
              inst.grad_u_lagrangian(i, ui, st.stale_gamma[i], st.stale_mu[i]);
        st.u.segment<2>(2 * i) = project_capability(inst.caps[i], ui);
    }
}

void dual_step_from_measurements(ControllerState& st, const OpfInstance& inst,
                                 const Eigen::VectorXd& m) {
    if (m.size() != inst.m())
        throw ControllerError("measurement vector does not cover the monitored set");
    const double a = inst.reg.alpha, e = inst.reg.eps;
    for (int j = 0; j < inst.m(); ++j) {
        st.gamma(j) =
            project_dual(st.gamma(j) + a * (inst.v_min - m(j) - e * st.gamma(j)), inst.reg.d_gamma);
        st.mu(j) =
            project_dual(st.mu(j) + a * (m(j) - inst.v_max - e * st.mu(j)), inst.reg.d_mu);
    }
}

void deliver_duals(ControllerState& st, const std::vector<uint8_t>& delivered) {
    ++st.k;
    for (size_t i = 0; i < delivered.size(); ++i) {
        if (delivered[i]) {
            st.stale_gamma[i] = st.gamma;
            st.stale_mu[i] = st.mu;
            st.last_delivery[i] = st.k;
        }
    }
}

void local_dual_update(ControllerState& st, const OpfInstance& inst, int der_index,
                       int monitored_position, double m_local) {
    if (monitored_position < 0)
        throw ControllerError("local dual update requested for an unmonitored DER");
    const double a = inst.reg.alpha, e = inst.reg.eps;
    double& g = st.stale_gamma[der_index](monitored_position);
    double& m = st.stale_mu[der_index](monitored_position);
    g = project_dual(g + a * (inst.v_min - m_local - e * g), inst.reg.d_gamma);
    m = project_dual(m + a * (m_local - inst.v_max - e * m), inst.reg.d_mu);
}

void primal_dual_step(ControllerState& st, const OpfInstance& inst) {
    inst.primal_dual_iteration(st.u, st.gamma, st.mu);
    ++st.k;
}

Eigen::VectorXd feedback_step(ControllerState& st, const OpfInstance& inst,
                              const Eigen::VectorXd& m, const std::vector<uint8_t>& delivered) {
    const Eigen::VectorXd err = stale_gradient_error(st, inst);
    primal_step_with_stale(st, inst);
    dual_step_from_measurements(st, inst, m);
    deliver_duals(st, delivered);
    return err;
}

double voltvar_setpoint_q(double m_local, const Capability& cap) {
    if (m_local <= 0.0) throw ControllerError("nonpositive voltage measurement");
    const double q_full =
        std::sqrt(std::max(0.0, cap.s * cap.s - cap.p_av * cap.p_av));
    if (m_local <= 1.0) return 0.0;
    if (m_local >= 1.05) return -q_full;
    return -(m_local - 1.0) / 0.05 * q_full;
}

}  // namespace derflow
