#pragma once

#include <Eigen/Dense>
#include <vector>

#include "derflow/opf.hpp"

namespace derflow {

/// Every constant entering the tracking analysis, plus the asymptotic bound
/// (alpha e + sigma_z) / (1 - rho(alpha)).
struct BoundsReport {
    double eta = 0.0;         // min(nu, eps)
    double l_phi = 0.0;       // sqrt((L + nu + 2G)^2 + 2 (G + eps)^2)
    double rho_alpha = 0.0;   // sqrt(1 - 2 eta alpha + alpha^2 l_phi^2)
    double alpha_max = 0.0;   // 2 eta / l_phi^2
    bool contraction = false; // rho_alpha < 1
    double g_norm = 0.0;      // G
    double k_lower = 0.0;     // K  (bound on ||g||)
    double k_upper = 0.0;     // Kbar (bound on ||gbar||)
    Eigen::VectorXd x_i;      // per-DER sensitivity norms
    Eigen::VectorXd e_i;      // per-DER staleness caps used
    double e_d = 0.0;
    Eigen::VectorXd stale_bound_i;  // alpha E_i X_i [K + Kbar + eps(Dg + Dm) + 2 e_d]
    double e_u = 0.0;
    double e_total = 0.0;     // sqrt(e_u^2 + 2 e_d^2)
    double sigma_z = 0.0;
    double asymptotic_bound = 0.0;
};

/// Populates the report from per-tick instances (K, Kbar are maximized over
/// the ticks), per-DER staleness caps, and the measured sigma_z.
BoundsReport compute_constants(const std::vector<OpfInstance>& instances,
                               const Eigen::VectorXd& x_norm,
                               const Eigen::VectorXd& staleness_caps,
                               double e_d, double sigma_z);

/// ||z^k - z*^k||_2 per tick.
std::vector<double> tracking_error_series(const std::vector<Eigen::VectorXd>& z,
                                          const std::vector<Eigen::VectorXd>& z_star);

/// Max of the trailing window, skipping at least burn_in leading steps.
double empirical_limsup(const std::vector<double>& series, int burn_in,
                        double window_fraction = 0.2);

/// Fits the per-step geometric decay ratio of a strictly positive error
/// series on [begin, end): exp(mean of log(e_{k+1}/e_k)).
double fitted_decay_ratio(const std::vector<double>& series, int begin, int end);

double measure_sigma_z(const std::vector<Eigen::VectorXd>& z_star);

/// Per-tick dispatch cost. reactive_only selects the Volt/VAr comparison
/// formula sum cq Q^2.
std::vector<double> cost_series(const std::vector<Eigen::VectorXd>& u_series,
                                const std::vector<Eigen::VectorXd>& p_av_series,
                                const CostModel& cost, bool reactive_only);

}  // namespace derflow
