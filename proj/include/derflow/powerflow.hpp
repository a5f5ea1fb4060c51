#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "derflow/admittance.hpp"

namespace derflow {

struct PowerFlowError : std::runtime_error {
    double residual;
    int iterations;
    PowerFlowError(const std::string& what, double res, int it)
        : std::runtime_error(what), residual(res), iterations(it) {}
};

/// Net complex injections s_n = p_n + j q_n at nodes 1..N.
struct InjectionProfile {
    Eigen::VectorXd p, q;
};

struct VoltageSolution {
    Eigen::VectorXcd v;
    Eigen::VectorXd rho;  // |v|
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;  // inf-norm of v .* conj(i) - s
};

/// Fixed-point power-flow solver:
///   v <- w + Y^{-1} diag(conj(v))^{-1} conj(s),   w = -Y^{-1} y0 V0
/// The admittance factorization is cached across solves.
class PowerFlowSolver {
  public:
    PowerFlowSolver(const AdmittanceModel& adm, std::complex<double> v0);

    VoltageSolution solve(const InjectionProfile& inj, double tol = 1e-8,
                          int max_iter = 200) const;
    /// Warm-started variant; `guess` must have length N.
    VoltageSolution solve_from(const Eigen::VectorXcd& guess, const InjectionProfile& inj,
                               double tol = 1e-8, int max_iter = 200) const;

    const Eigen::VectorXcd& no_load_voltage() const { return w_; }

  private:
    Eigen::MatrixXcd Y_;
    Eigen::VectorXcd y0_;
    std::complex<double> v0_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
    Eigen::VectorXcd w_;
};

/// m_n = rho_n + delta_n with |delta_n| <= noise_bound, delta drawn uniformly
/// from the given seed. noise_bound = 0 returns the magnitudes untouched.
Eigen::VectorXd measure_voltages(const VoltageSolution& sol, const std::vector<int>& nodes,
                                 double noise_bound, uint64_t seed);

/// Deterministic seed derivation for per-tick measurement streams.
uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b = 0);

}  // namespace derflow
