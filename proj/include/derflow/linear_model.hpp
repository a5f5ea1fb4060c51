#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "derflow/admittance.hpp"

namespace derflow {

struct LinearModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// First-order voltage model around the no-load profile w = -Y^{-1} y0 V0:
///   v   ~ H p + J q + b
///   rho ~ R p + B q + a
/// Exact at zero injections (b = w, a = |w|).
struct LinearModel {
    Eigen::MatrixXcd H, J;  // N x N complex sensitivities
    Eigen::MatrixXd R, B;   // N x N magnitude sensitivities
    Eigen::VectorXcd b;     // no-load voltage w
    Eigen::VectorXd a;      // |w|
};

LinearModel build_linear_model(const AdmittanceModel& adm, std::complex<double> v0);

/// Rows of R, B restricted to the monitored set and columns split between
/// DER nodes and the remaining (load-only) nodes. Also carries the exact
/// per-DER sensitivity norms X_i = ||[r_i; b_i]||_2.
struct SensitivitySlices {
    std::vector<int> monitored;    // M node indices (1-based)
    std::vector<int> der_nodes;    // Ng node indices (1-based)
    std::vector<int> other_nodes;  // N - Ng node indices (1-based)
    Eigen::MatrixXd Rg, Bg;        // M x Ng
    Eigen::MatrixXd Rl, Bl;        // M x (N - Ng)
    Eigen::VectorXd a_m;           // M
    Eigen::VectorXd x_norm;        // Ng, spectral norm of the 2 x M stack
};

SensitivitySlices slice_sensitivities(const LinearModel& lin,
                                      const std::vector<int>& monitored,
                                      const std::vector<int>& der_nodes);

/// c_n = a_n - sum over non-DER nodes of (r_{n,i} P_l,i + b_{n,i} Q_l,i),
/// for n in the monitored set. Load vectors are full length N (entries at
/// DER nodes are ignored here; they enter the constraint functions directly).
Eigen::VectorXd constraint_offsets(const SensitivitySlices& s,
                                   const Eigen::VectorXd& load_p,
                                   const Eigen::VectorXd& load_q);

}  // namespace derflow
