#include "derflow/analysis.hpp"

#include <cmath>

namespace derflow {

BoundsReport compute_constants(const std::vector<OpfInstance>& instances,
                               const Eigen::VectorXd& x_norm,
                               const Eigen::VectorXd& staleness_caps, double e_d,
                               double sigma_z) {
    if (instances.empty()) throw OpfError("constants need at least one instance");
    const OpfInstance& first = instances.front();
    const auto& reg = first.reg;
    BoundsReport rep;
    rep.eta = std::min(reg.nu, reg.eps);
    rep.g_norm = first.constraint_jacobian_norm();
    rep.k_lower = 0.0;
    rep.k_upper = 0.0;
    for (const auto& inst : instances) {
        double kl, ku;
        inst.constraint_value_bounds(kl, ku);
        rep.k_lower = std::max(rep.k_lower, kl);
        rep.k_upper = std::max(rep.k_upper, ku);
    }
    const double L = first.cost.lipschitz();
    const double a = L + reg.nu + 2.0 * rep.g_norm;
    const double b = rep.g_norm + reg.eps;
    rep.l_phi = std::sqrt(a * a + 2.0 * b * b);
    rep.alpha_max = 2.0 * rep.eta / (rep.l_phi * rep.l_phi);
    rep.rho_alpha = std::sqrt(
        std::max(0.0, 1.0 - 2.0 * rep.eta * reg.alpha + reg.alpha * reg.alpha * rep.l_phi * rep.l_phi));
    rep.contraction = rep.rho_alpha < 1.0;

    rep.x_i = x_norm;
    rep.e_i = staleness_caps;
    rep.e_d = e_d;
    const double inner = rep.k_lower + rep.k_upper + reg.eps * (reg.d_gamma + reg.d_mu) + 2.0 * e_d;
    rep.stale_bound_i = reg.alpha * inner * staleness_caps.cwiseProduct(x_norm);
    rep.e_u = reg.alpha * inner * staleness_caps.cwiseProduct(x_norm).norm();
    rep.e_total = std::sqrt(rep.e_u * rep.e_u + 2.0 * e_d * e_d);
    rep.sigma_z = sigma_z;
    rep.asymptotic_bound = rep.contraction
                               ? (reg.alpha * rep.e_total + sigma_z) / (1.0 - rep.rho_alpha)
                               : std::numeric_limits<double>::infinity();
    return rep;
}

std::vector<double> tracking_error_series(const std::vector<Eigen::VectorXd>& z,
                                          const std::vector<Eigen::VectorXd>& z_star) {
    if (z.size() != z_star.size())
        throw OpfError("trajectory and oracle series have different lengths");
    std::vector<double> out(z.size());
    for (size_t k = 0; k < z.size(); ++k) out[k] = (z[k] - z_star[k]).norm();
    return out;
}

double empirical_limsup(const std::vector<double>& series, int burn_in, double window_fraction) {
    if (series.empty()) throw OpfError("empty error series");
    const int n = static_cast<int>(series.size());
    int start = n - std::max(1, static_cast<int>(window_fraction * n));
    start = std::max(start, std::min(burn_in, n - 1));
    double worst = 0.0;
    for (int k = start; k < n; ++k) worst = std::max(worst, series[k]);
    return worst;
}

double fitted_decay_ratio(const std::vector<double>& series, int begin, int end) {
    double acc = 0.0;
    int cnt = 0;
    for (int k = begin; k + 1 < end; ++k) {
        if (series[k] <= 0.0 || series[k + 1] <= 0.0) continue;
        acc += std::log(series[k + 1] / series[k]);
        ++cnt;
    }
    if (cnt == 0) return 0.0;
    return std::exp(acc / cnt);
}

double measure_sigma_z(const std::vector<Eigen::VectorXd>& z_star) {
    double worst = 0.0;
    for (size_t k = 0; k + 1 < z_star.size(); ++k)
        worst = std::max(worst, (z_star[k + 1] - z_star[k]).norm());
    return worst;
}

std::vector<double> cost_series(const std::vector<Eigen::VectorXd>& u_series,
                                const std::vector<Eigen::VectorXd>& p_av_series,
                                const CostModel& cost, bool reactive_only) {
    if (u_series.size() != p_av_series.size())
        throw OpfError("setpoint and availability series have different lengths");
    std::vector<double> out(u_series.size(), 0.0);
    for (size_t k = 0; k < u_series.size(); ++k) {
        const auto& u = u_series[k];
        const auto& pav = p_av_series[k];
        double v = 0.0;
        for (int i = 0; i < pav.size(); ++i) {
            const double p = u(2 * i), q = u(2 * i + 1);
            v += cost.terms[i].cq * q * q;
            if (!reactive_only) v += cost.terms[i].cp * (pav(i) - p) * (pav(i) - p);
        }
        out[k] = v;
    }
    return out;
}

}  // namespace derflow
