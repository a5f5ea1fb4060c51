// Test-only reference computations, independent of the library's own
// evaluation paths.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>

#include "derflow/feeder.hpp"
#include "derflow/opf.hpp"

namespace oracles {

/// Exact single-line power flow: slack v0 (real), series impedance z, load
/// injection s at the far node. Returns the high-voltage branch of the
/// quadratic solution.
inline std::complex<double> two_bus_voltage(double v0, std::complex<double> z,
                                            std::complex<double> s) {
    const std::complex<double> c = z * std::conj(s);
    // t = |V1|^2 solves t^2 - t (2 Re c + v0^2) + |c|^2 = 0
    const double bq = 2.0 * c.real() + v0 * v0;
    const double disc = bq * bq - 4.0 * std::norm(c);
    const double t = 0.5 * (bq + std::sqrt(disc));
    return (t - std::conj(c)) / v0;
}

/// Central finite differences of a scalar function of a stacked vector.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h = 1e-6) {
    Eigen::VectorXd g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

/// Nearest feasible point on a P-grid of `cells` columns, Q clamped to the
/// grid-snapped feasible chord per column. Equivalent to scanning the full
/// cells x cells grid but without the quadratic cost.
inline Eigen::Vector2d grid_projection(const derflow::Capability& cap,
                                       const Eigen::Vector2d& x, int cells = 2000) {
    const double q_span = 2.0 * cap.s;
    const double dq = q_span / (cells - 1);
    Eigen::Vector2d best(cap.p_min, 0.0);
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int jp = 0; jp < cells; ++jp) {
        const double p = cap.p_min + (cap.p_av - cap.p_min) * jp / (cells - 1);
        const double qm = std::sqrt(std::max(0.0, cap.s * cap.s - p * p));
        // snap the chord ends inward onto the Q grid
        const double lo = std::ceil((-qm + cap.s) / dq) * dq - cap.s;
        const double hi = std::floor((qm + cap.s) / dq) * dq - cap.s;
        if (lo > hi) continue;
        const double q = std::clamp(std::round((x(1) + cap.s) / dq) * dq - cap.s, lo, hi);
        const double d2 = (p - x(0)) * (p - x(0)) + (q - x(1)) * (q - x(1));
        if (d2 < best_d2) {
            best_d2 = d2;
            best = {p, q};
        }
    }
    return best;
}

inline derflow::FeederModel two_bus_feeder(std::complex<double> z = {0.01, 0.01},
                                           std::complex<double> v0 = {1.0, 0.0}) {
    derflow::FeederModel f;
    f.node_count = 2;
    f.slack_voltage = v0;
    f.edges.push_back({0, 1, z, {0.0, 0.0}});
    f.monitored = {1};
    return f;
}

inline derflow::FeederModel three_bus_chain(std::complex<double> z = {0.02, 0.03}) {
    derflow::FeederModel f;
    f.node_count = 3;
    f.edges.push_back({0, 1, z, {0.0, 0.0}});
    f.edges.push_back({1, 2, z, {0.0, 0.0}});
    f.monitored = {1, 2};
    return f;
}

inline std::string bundled(const std::string& name) {
    return std::string(DERFLOW_DATA_DIR) + "/" + name;
}

}  // namespace oracles
