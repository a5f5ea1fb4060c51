#include "derflow/opf.hpp"

#include <cmath>

namespace derflow {

void Capability::validate() const {
    if (!(p_min <= p_av))
        throw OpfError("empty capability set: p_min > p_av");
    if (!(p_av <= s) || std::abs(p_min) > s)
        throw OpfError("capability box leaves the capacity disk");
    if (s <= 0.0) throw OpfError("nonpositive inverter capacity");
}

bool Capability::contains(const Eigen::Vector2d& u, double tol) const {
    return u(0) >= p_min - tol && u(0) <= p_av + tol &&
           u(0) * u(0) + u(1) * u(1) <= s * s + tol;
}

Eigen::Vector2d project_capability(const Capability& cap, const Eigen::Vector2d& point) {
    cap.validate();
    const double s2 = cap.s * cap.s;
    auto qmax_at = [&](double p) { return std::sqrt(std::max(0.0, s2 - p * p)); };

    Eigen::Vector2d best;
    double best_d2 = std::numeric_limits<double>::infinity();
    auto consider = [&](const Eigen::Vector2d& cand) {
        const double d2 = (cand - point).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = cand;
        }
    };

    // box clamp, kept when inside the disk
    Eigen::Vector2d clamped(std::clamp(point(0), cap.p_min, cap.p_av), point(1));
    if (clamped.squaredNorm() <= s2) consider(clamped);

    // radial projection onto the disk, kept when inside the box
    const double norm = point.norm();
    if (norm > 0.0) {
        Eigen::Vector2d radial = point * (cap.s / norm);
        if (radial(0) >= cap.p_min && radial(0) <= cap.p_av) consider(radial);
    } else {
        consider(Eigen::Vector2d(std::clamp(0.0, cap.p_min, cap.p_av), 0.0));
    }

    // box edges P = p_min and P = p_av with Q clamped to the disk chord
    for (double pe : {cap.p_min, cap.p_av}) {
        const double qm = qmax_at(pe);
        consider(Eigen::Vector2d(pe, std::clamp(point(1), -qm, qm)));
    }
    return best;
}

double CostModel::lipschitz() const {
    double worst = 0.0;
    for (const auto& t : terms) worst = std::max({worst, 2.0 * t.cp, 2.0 * t.cq});
    return worst;
}

namespace {

// Model-predicted monitored voltage magnitudes; shared by g and gbar so the
// two affine forms stay exact complements.
Eigen::VectorXd predicted_rho(const OpfInstance& inst, const Eigen::VectorXd& u) {
    const int n = inst.ng();
    Eigen::VectorXd dp(n), dq(n);
    for (int i = 0; i < n; ++i) {
        dp(i) = u(2 * i) - inst.pl_der(i);
        dq(i) = u(2 * i + 1) - inst.ql_der(i);
    }
    return inst.c + inst.Rg * dp + inst.Bg * dq;
}

}  // namespace

Eigen::VectorXd OpfInstance::eval_g(const Eigen::VectorXd& u) const {
    return Eigen::VectorXd::Constant(m(), v_min) - predicted_rho(*this, u);
}

Eigen::VectorXd OpfInstance::eval_gbar(const Eigen::VectorXd& u) const {
    return predicted_rho(*this, u) - Eigen::VectorXd::Constant(m(), v_max);
}

Eigen::Vector2d OpfInstance::grad_f(int i, const Eigen::Vector2d& ui) const {
    const auto& t = cost.terms[i];
    return {-2.0 * t.cp * (caps[i].p_av - ui(0)), 2.0 * t.cq * ui(1)};
}

Eigen::Vector2d OpfInstance::grad_u_lagrangian(int i, const Eigen::Vector2d& ui,
                                               const Eigen::VectorXd& gamma,
                                               const Eigen::VectorXd& mu) const {
    const Eigen::VectorXd d = mu - gamma;
    Eigen::Vector2d g = grad_f(i, ui);
    g(0) += Rg.col(i).dot(d) + reg.nu * ui(0);
    g(1) += Bg.col(i).dot(d) + reg.nu * ui(1);
    return g;
}

double OpfInstance::lagrangian_value(const Eigen::VectorXd& u, const Eigen::VectorXd& gamma,
                                     const Eigen::VectorXd& mu) const {
    const Eigen::VectorXd d = mu - gamma;
    double val = c.dot(d) + v_min * gamma.sum() - v_max * mu.sum() -
                 0.5 * reg.eps * (gamma.squaredNorm() + mu.squaredNorm());
    for (int i = 0; i < ng(); ++i) {
        const double p = u(2 * i), q = u(2 * i + 1);
        const auto& t = cost.terms[i];
        val += t.cq * q * q + t.cp * (caps[i].p_av - p) * (caps[i].p_av - p);
        val += (p - pl_der(i)) * Rg.col(i).dot(d) + (q - ql_der(i)) * Bg.col(i).dot(d);
        val += 0.5 * reg.nu * (p * p + q * q);
    }
    return val;
}

Eigen::VectorXd OpfInstance::phi_map(const Eigen::VectorXd& z) const {
    const int n = ng(), mm = m();
    const Eigen::VectorXd u = z.head(2 * n);
    const Eigen::VectorXd gamma = z.segment(2 * n, mm);
    const Eigen::VectorXd mu = z.tail(mm);
    Eigen::VectorXd out(zdim());
    for (int i = 0; i < n; ++i)
        out.segment<2>(2 * i) = grad_u_lagrangian(i, u.segment<2>(2 * i), gamma, mu);
    out.segment(2 * n, mm) = -(eval_g(u) - reg.eps * gamma);
    out.tail(mm) = -(eval_gbar(u) - reg.eps * mu);
    return out;
}

Eigen::VectorXd OpfInstance::project_z(const Eigen::VectorXd& z) const {
    const int n = ng(), mm = m();
    Eigen::VectorXd out(zdim());
    for (int i = 0; i < n; ++i)
        out.segment<2>(2 * i) = project_capability(caps[i], z.segment<2>(2 * i));
    for (int j = 0; j < mm; ++j) {
        out(2 * n + j) = project_dual(z(2 * n + j), reg.d_gamma);
        out(2 * n + mm + j) = project_dual(z(2 * n + mm + j), reg.d_mu);
    }
    return out;
}

void OpfInstance::primal_dual_iteration(Eigen::VectorXd& u, Eigen::VectorXd& gamma,
                                        Eigen::VectorXd& mu) const {
    const Eigen::VectorXd g = eval_g(u);
    const Eigen::VectorXd gbar = eval_gbar(u);
    for (int i = 0; i < ng(); ++i) {
        Eigen::Vector2d ui = u.segment<2>(2 * i);
        ui -= reg.alpha * grad_u_lagrangian(i, ui, gamma, mu);
        u.segment<2>(2 * i) = project_capability(caps[i], ui);
    }
    for (int j = 0; j < m(); ++j) {
        gamma(j) = project_dual(gamma(j) + reg.alpha * (g(j) - reg.eps * gamma(j)), reg.d_gamma);
        mu(j) = project_dual(mu(j) + reg.alpha * (gbar(j) - reg.eps * mu(j)), reg.d_mu);
    }
}

double OpfInstance::constraint_jacobian_norm() const {
    // Jacobian of g wrt u is the M x 2Ng interleaved stack of [Rg Bg]
    Eigen::MatrixXd jac(m(), 2 * ng());
    for (int i = 0; i < ng(); ++i) {
        jac.col(2 * i) = Rg.col(i);
        jac.col(2 * i + 1) = Bg.col(i);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    return svd.singularValues()(0);
}

void OpfInstance::constraint_value_bounds(double& k_lower, double& k_upper) const {
    const int n = ng(), mm = m();
    double sum_lo = 0.0, sum_hi = 0.0;
    for (int j = 0; j < mm; ++j) {
        // interval of the common affine part rho_lin(u) over the box hull of Y
        double lo = c(j), hi = c(j);
        for (int i = 0; i < n; ++i) {
            const auto& cap = caps[i];
            const double p_lo = cap.p_min - pl_der(i), p_hi = cap.p_av - pl_der(i);
            const double p_inner = std::clamp(0.0, cap.p_min, cap.p_av);
            const double qm = std::sqrt(std::max(0.0, cap.s * cap.s - p_inner * p_inner));
            const double q_lo = -qm - ql_der(i), q_hi = qm - ql_der(i);
            const double r = Rg(j, i), b = Bg(j, i);
            lo += std::min(r * p_lo, r * p_hi) + std::min(b * q_lo, b * q_hi);
            hi += std::max(r * p_lo, r * p_hi) + std::max(b * q_lo, b * q_hi);
        }
        const double g_abs = std::max(std::abs(v_min - hi), std::abs(v_min - lo));
        const double gbar_abs = std::max(std::abs(lo - v_max), std::abs(hi - v_max));
        sum_lo += g_abs * g_abs;
        sum_hi += gbar_abs * gbar_abs;
    }
    k_lower = std::sqrt(sum_lo);
    k_upper = std::sqrt(sum_hi);
}

Eigen::VectorXd SaddlePoint::z() const {
    Eigen::VectorXd out(u.size() + gamma.size() + mu.size());
    out << u, gamma, mu;
    return out;
}

SaddlePoint solve_saddle_oracle(const OpfInstance& inst, double tol, int max_iter,
                                const Eigen::VectorXd* warm_start) {
    if (tol <= 0.0) throw OpfError("oracle tolerance must be positive");
    const int n = inst.ng(), mm = inst.m();
    Eigen::VectorXd u, gamma, mu;
    if (warm_start) {
        u = warm_start->head(2 * n);
        gamma = warm_start->segment(2 * n, mm);
        mu = warm_start->tail(mm);
    } else {
        u = Eigen::VectorXd::Zero(2 * n);
        for (int i = 0; i < n; ++i)
            u.segment<2>(2 * i) = project_capability(inst.caps[i], Eigen::Vector2d::Zero());
        gamma = Eigen::VectorXd::Zero(mm);
        mu = Eigen::VectorXd::Zero(mm);
    }
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::VectorXd u_prev = u, g_prev = gamma, m_prev = mu;
        inst.primal_dual_iteration(u, gamma, mu);
        const double disp = std::sqrt((u - u_prev).squaredNorm() + (gamma - g_prev).squaredNorm() +
                                      (mu - m_prev).squaredNorm());
        if (disp <= tol) {
            SaddlePoint sp;
            sp.u = u;
            sp.gamma = gamma;
            sp.mu = mu;
            sp.residual = disp;
            sp.iterations = it;
            return sp;
        }
    }
    throw OpfError("saddle-point oracle did not converge; stepsize likely too large");
}

}  // namespace derflow
