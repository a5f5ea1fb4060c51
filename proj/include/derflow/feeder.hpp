#pragma once

#include <complex>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace derflow {

struct FeederError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Edge {
    int from = 0;
    int to = 0;
    std::complex<double> z;        // series impedance, pu
    std::complex<double> y_shunt;  // total line shunt admittance, pu (split half per end)
};

struct BaseLoad {
    int node = 0;
    double p = 0.0;  // pu
    double q = 0.0;  // pu
};

struct DerSpec {
    int node = 0;
    double p_min = 0.0;    // pu
    double s_rating = 0.0; // inverter apparent-power capacity, pu
};

/// Single-phase feeder description. Node 0 is the slack bus; nodes 1..N carry
/// loads and optionally DERs. All electrical quantities are per-unit on the
/// declared base.
struct FeederModel {
    int node_count = 0;  // N+1 including slack
    double base_mva = 1.0;
    double base_kv = 1.0;
    std::complex<double> slack_voltage{1.0, 0.0};
    std::vector<Edge> edges;
    std::vector<BaseLoad> base_loads;
    std::vector<DerSpec> ders;
    std::vector<int> monitored;  // subset of 1..N

    int n() const { return node_count - 1; }

    std::vector<int> der_nodes() const;
    std::vector<int> non_der_nodes() const;

    /// Throws FeederError on any violated structural invariant
    /// (connectivity, index ranges, degenerate edges, slack in DER set).
    void validate() const;
};

FeederModel parse_feeder_text(std::istream& in, const std::string& name);
FeederModel parse_feeder_file(const std::string& path);

}  // namespace derflow
