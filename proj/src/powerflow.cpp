#include "derflow/powerflow.hpp"

#include <random>

namespace derflow {

PowerFlowSolver::PowerFlowSolver(const AdmittanceModel& adm, std::complex<double> v0)
    : Y_(adm.Y), y0_(adm.y0), v0_(v0), lu_(adm.Y) {
    w_ = lu_.solve((-v0_) * y0_);
}

namespace {

double balance_residual(const Eigen::MatrixXcd& Y, const Eigen::VectorXcd& y0,
                        std::complex<double> v0, const Eigen::VectorXcd& v,
                        const Eigen::VectorXcd& s) {
    const Eigen::VectorXcd i = v0 * y0 + Y * v;
    return (v.cwiseProduct(i.conjugate()) - s).cwiseAbs().maxCoeff();
}

}  // namespace

VoltageSolution PowerFlowSolver::solve(const InjectionProfile& inj, double tol,
                                       int max_iter) const {
    return solve_from(w_, inj, tol, max_iter);
}

VoltageSolution PowerFlowSolver::solve_from(const Eigen::VectorXcd& guess,
                                            const InjectionProfile& inj, double tol,
                                            int max_iter) const {
    if (tol <= 0.0 || max_iter < 1) throw std::invalid_argument("bad solver parameters");
    const int n = static_cast<int>(Y_.rows());
    Eigen::VectorXcd s(n);
    for (int i = 0; i < n; ++i) s(i) = {inj.p(i), inj.q(i)};
    Eigen::VectorXcd v = guess;
    double res = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        res = balance_residual(Y_, y0_, v0_, v, s);
        if (res <= tol) {
            VoltageSolution sol;
            sol.v = v;
            sol.rho = v.cwiseAbs();
            sol.converged = true;
            sol.iterations = it;
            sol.residual = res;
            return sol;
        }
        v = w_ + lu_.solve(s.conjugate().cwiseQuotient(v.conjugate()));
        if (!v.allFinite())
            throw PowerFlowError("power flow diverged (non-finite iterate)", res, it);
    }
    throw PowerFlowError("power flow did not converge within " + std::to_string(max_iter) +
                             " iterations (residual " + std::to_string(res) + ")",
                         res, max_iter);
}

Eigen::VectorXd measure_voltages(const VoltageSolution& sol, const std::vector<int>& nodes,
                                 double noise_bound, uint64_t seed) {
    Eigen::VectorXd m(static_cast<int>(nodes.size()));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-noise_bound, noise_bound);
    for (int i = 0; i < m.size(); ++i) {
        const double rho = sol.rho(nodes[i] - 1);
        m(i) = noise_bound > 0.0 ? rho + dist(rng) : rho;
    }
    return m;
}

uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
    // splitmix64 over the concatenated words
    uint64_t x = seed;
    for (uint64_t w : {a, b}) {
        x += 0x9e3779b97f4a7c15ull + w;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        x = x ^ (x >> 31);
    }
    return x;
}

}  // namespace derflow
