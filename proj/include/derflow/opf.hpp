#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "derflow/linear_model.hpp"

namespace derflow {

struct OpfError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Feasible operating region of one inverter:
///   { (P, Q) : p_min <= P <= p_av,  P^2 + Q^2 <= s^2 }
struct Capability {
    double p_min = 0.0;
    double p_av = 0.0;
    double s = 0.0;
    void validate() const;
    bool contains(const Eigen::Vector2d& u, double tol = 1e-12) const;
};

/// Exact Euclidean projection onto the box-disk intersection.
Eigen::Vector2d project_capability(const Capability& cap, const Eigen::Vector2d& point);

/// Clamp to [0, box].
inline double project_dual(double x, double box) {
    return x < 0.0 ? 0.0 : (x > box ? box : x);
}

/// Per-DER quadratic cost f_i(P, Q) = cq Q^2 + cp (p_av - P)^2.
struct CostTerm {
    double cp = 0.0;
    double cq = 0.0;
};

struct CostModel {
    std::vector<CostTerm> terms;
    /// Exact Lipschitz constant of the stacked gradient map for this
    /// diagonal quadratic family.
    double lipschitz() const;
};

struct RegularizationParams {
    double nu = 1e-3;
    double eps = 1e-4;
    double alpha = 0.2;
    double d_gamma = 1e3;
    double d_mu = 1e3;
};

/// One frozen instance of the voltage-constrained dispatch problem: the
/// monitored-row sensitivities, constraint offsets, DER-local loads and
/// capabilities, cost, and regularization parameters.
///
/// Primal layout: u = [P_1, Q_1, ..., P_Ng, Q_Ng].
/// Stacked layout: z = [u; gamma; mu].
struct OpfInstance {
    Eigen::MatrixXd Rg, Bg;          // M x Ng
    Eigen::VectorXd c;               // M
    Eigen::VectorXd pl_der, ql_der;  // Ng, loads at the DER nodes
    std::vector<Capability> caps;    // Ng
    CostModel cost;
    RegularizationParams reg;
    double v_min = 0.95;
    double v_max = 1.05;

    int ng() const { return static_cast<int>(caps.size()); }
    int m() const { return static_cast<int>(c.size()); }
    int zdim() const { return 2 * ng() + 2 * m(); }

    Eigen::VectorXd eval_g(const Eigen::VectorXd& u) const;
    Eigen::VectorXd eval_gbar(const Eigen::VectorXd& u) const;

    Eigen::Vector2d grad_f(int i, const Eigen::Vector2d& ui) const;
    /// grad_f_i(u_i) + xi_i (mu - gamma) + nu u_i
    Eigen::Vector2d grad_u_lagrangian(int i, const Eigen::Vector2d& ui,
                                      const Eigen::VectorXd& gamma,
                                      const Eigen::VectorXd& mu) const;

    double lagrangian_value(const Eigen::VectorXd& u, const Eigen::VectorXd& gamma,
                            const Eigen::VectorXd& mu) const;

    /// Stacked saddle map: [grad_u blocks; -(g - eps gamma); -(gbar - eps mu)].
    Eigen::VectorXd phi_map(const Eigen::VectorXd& z) const;

    /// Componentwise projection onto Y x [0,D]^M x [0,D]^M.
    Eigen::VectorXd project_z(const Eigen::VectorXd& z) const;

    /// One projected primal-dual step z <- proj(z - alpha Phi(z)), applied
    /// in-place on the split representation.
    void primal_dual_iteration(Eigen::VectorXd& u, Eigen::VectorXd& gamma,
                               Eigen::VectorXd& mu) const;

    /// Spectral norm of the constraint Jacobian [Rg Bg] (the constant G).
    double constraint_jacobian_norm() const;

    /// Interval bounds max ||g||_2 and max ||gbar||_2 over the box hull of
    /// the capability sets (the constants K, Kbar).
    void constraint_value_bounds(double& k_lower, double& k_upper) const;
};

struct SaddlePoint {
    Eigen::VectorXd u, gamma, mu;
    double residual = 0.0;  // last iterate displacement
    int iterations = 0;
    Eigen::VectorXd z() const;
};

/// Runs the projected primal-dual iteration with exact model gradients on a
/// frozen instance until the iterate displacement drops below tol.
SaddlePoint solve_saddle_oracle(const OpfInstance& inst, double tol, int max_iter,
                                const Eigen::VectorXd* warm_start = nullptr);

}  // namespace derflow
