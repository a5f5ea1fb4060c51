#include "derflow/linear_model.hpp"

namespace derflow {

LinearModel build_linear_model(const AdmittanceModel& adm, std::complex<double> v0) {
    const int n = static_cast<int>(adm.Y.rows());
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(adm.Y);
    {
        // invertibility guard: reconstruct residual on a probe vector
        Eigen::VectorXcd probe = Eigen::VectorXcd::Ones(n);
        Eigen::VectorXcd back = adm.Y * lu.solve(probe);
        if (!back.allFinite() || (back - probe).norm() > 1e-6 * probe.norm())
            throw LinearModelError("admittance matrix is numerically singular");
    }
    LinearModel lin;
    lin.b = lu.solve((-v0) * adm.y0);  // no-load voltage w
    for (int i = 0; i < n; ++i)
        if (std::abs(lin.b(i)) == 0.0)
            throw LinearModelError("zero no-load voltage at node " + std::to_string(i + 1));

    // v ~ w + Y^{-1} diag(conj(w))^{-1} conj(s); with s = p + jq this gives
    // H = W applied to p and J = -jW applied to q, W = Y^{-1} diag(conj(w))^{-1}.
    Eigen::MatrixXcd W = lu.solve(Eigen::MatrixXcd(lin.b.conjugate().cwiseInverse().asDiagonal()));
    lin.H = W;
    lin.J = std::complex<double>(0.0, -1.0) * W;

    lin.a = lin.b.cwiseAbs();
    // d|v_n| = Re(conj(w_n)/|w_n| dv_n)
    Eigen::VectorXcd dir = lin.b.conjugate().cwiseQuotient(lin.a.cast<std::complex<double>>());
    Eigen::MatrixXcd scaled = dir.asDiagonal() * W;
    lin.R = scaled.real();
    lin.B = scaled.imag();  // Re(dir * (-j) W) = Im(dir * W)
    if (!lin.R.allFinite() || !lin.B.allFinite())
        throw LinearModelError("non-finite sensitivity entries");
    return lin;
}

SensitivitySlices slice_sensitivities(const LinearModel& lin, const std::vector<int>& monitored,
                                      const std::vector<int>& der_nodes) {
    const int n = static_cast<int>(lin.R.rows());
    SensitivitySlices s;
    s.monitored = monitored;
    s.der_nodes = der_nodes;
    std::vector<char> is_der(n + 1, 0);
    for (int d : der_nodes) is_der[d] = 1;
    for (int i = 1; i <= n; ++i)
        if (!is_der[i]) s.other_nodes.push_back(i);

    const int m = static_cast<int>(monitored.size());
    const int ng = static_cast<int>(der_nodes.size());
    const int nl = static_cast<int>(s.other_nodes.size());
    s.Rg.resize(m, ng);
    s.Bg.resize(m, ng);
    s.Rl.resize(m, nl);
    s.Bl.resize(m, nl);
    s.a_m.resize(m);
    for (int r = 0; r < m; ++r) {
        const int row = monitored[r] - 1;
        s.a_m(r) = lin.a(row);
        for (int cidx = 0; cidx < ng; ++cidx) {
            s.Rg(r, cidx) = lin.R(row, der_nodes[cidx] - 1);
            s.Bg(r, cidx) = lin.B(row, der_nodes[cidx] - 1);
        }
        for (int cidx = 0; cidx < nl; ++cidx) {
            s.Rl(r, cidx) = lin.R(row, s.other_nodes[cidx] - 1);
            s.Bl(r, cidx) = lin.B(row, s.other_nodes[cidx] - 1);
        }
    }
    // X_i: spectral norm of the 2 x M stack [r_i^T; b_i^T]
    s.x_norm.resize(ng);
    for (int i = 0; i < ng; ++i) {
        Eigen::Matrix2d gram;
        const Eigen::VectorXd r = s.Rg.col(i), b = s.Bg.col(i);
        gram << r.squaredNorm(), r.dot(b), r.dot(b), b.squaredNorm();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(gram);
        s.x_norm(i) = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    }
    return s;
}

Eigen::VectorXd constraint_offsets(const SensitivitySlices& s, const Eigen::VectorXd& load_p,
                                   const Eigen::VectorXd& load_q) {
    const int nl = static_cast<int>(s.other_nodes.size());
    Eigen::VectorXd pl(nl), ql(nl);
    for (int i = 0; i < nl; ++i) {
        const int node = s.other_nodes[i];
        if (node > load_p.size() || node > load_q.size())
            throw LinearModelError("load vector misses node " + std::to_string(node));
        pl(i) = load_p(node - 1);
        ql(i) = load_q(node - 1);
    }
    return s.a_m - s.Rl * pl - s.Bl * ql;
}

}  // namespace derflow
