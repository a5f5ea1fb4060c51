#include "derflow/admittance.hpp"

namespace derflow {

AdmittanceModel build_admittance(const FeederModel& feeder) {
    feeder.validate();
    const int n = feeder.n();
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    for (const auto& e : feeder.edges) {
        const std::complex<double> ys = 1.0 / e.z;
        const std::complex<double> half_shunt = 0.5 * e.y_shunt;
        full(e.from, e.from) += ys + half_shunt;
        full(e.to, e.to) += ys + half_shunt;
        full(e.from, e.to) -= ys;
        full(e.to, e.from) -= ys;
    }
    AdmittanceModel adm;
    adm.Y = full.bottomRightCorner(n, n);
    adm.y0 = full.block(1, 0, n, 1);
    return adm;
}

}  // namespace derflow
