#pragma once

#include <Eigen/Dense>
#include <complex>

#include "derflow/feeder.hpp"

namespace derflow {

/// Nodal admittance representation over the non-slack nodes:
///   i = V0 * y0 + Y * v
/// where v collects the complex voltages at nodes 1..N and i the injected
/// currents.
struct AdmittanceModel {
    Eigen::MatrixXcd Y;   // N x N, symmetric
    Eigen::VectorXcd y0;  // N, slack coupling column
};

AdmittanceModel build_admittance(const FeederModel& feeder);

}  // namespace derflow
