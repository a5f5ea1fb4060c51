#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "derflow/analysis.hpp"
#include "derflow/channel.hpp"
#include "derflow/controllers.hpp"
#include "derflow/feeder.hpp"
#include "derflow/powerflow.hpp"

namespace derflow {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
    std::string feeder_path;
    int horizon = 600;
    double tau = 1.0;
    double tau_fast = 0.1;
    Policy policy = Policy::feedback;

    double alpha = 0.2;
    double nu = 1e-3;
    double eps = 1e-4;
    double d_gamma = 1e3;
    double d_mu = 1e3;
    double v_min = 0.95;
    double v_max = 1.05;
    double cost_cp = 3.0;
    double cost_cq = 1.0;

    double p_loss = 0.0;
    int e_max = 0;
    uint64_t channel_seed = 1;
    double noise_bound = 0.0;
    uint64_t measure_seed = 2;

    // synthetic series
    uint64_t series_seed = 3;
    double load_scale = 0.45;
    double load_diurnal_amp = 0.15;
    double load_walk_sigma = 0.01;
    double pv_peak = 0.9;
    double pv_walk_sigma = 0.01;
    double day_fraction = 0.5;  // 0.5 = solar noon at the window center
    std::optional<std::string> load_series_path;  // CSV override
    std::optional<std::string> pav_series_path;   // CSV override

    double pf_tol = 1e-8;
    int pf_max_iter = 200;
    double oracle_tol = 1e-10;
    int oracle_max_iter = 2000000;

    bool analysis = true;       // solve the oracle per tick
    bool linear_plant = false;  // substitute the linear model for the plant
    bool start_at_available_power = true;
    int burn_in = -1;           // -1: 5/(1-rho) rule
    double limsup_window = 0.2;

    static ScenarioConfig parse_file(const std::string& path);
    static ScenarioConfig parse_text(std::istream& in, const std::string& name);
};

/// Fully validated simulation instance: feeder, models, and time series.
struct Scenario {
    ScenarioConfig cfg;
    FeederModel feeder;
    AdmittanceModel adm;
    LinearModel lin;
    SensitivitySlices sens;
    Eigen::MatrixXd load_p, load_q;  // horizon x N
    Eigen::MatrixXd p_av;            // horizon x Ng

    int ticks_per_global() const;  // tau / tau_fast
};

Scenario load_scenario(const std::string& config_path);
Scenario build_scenario(const ScenarioConfig& cfg, FeederModel feeder);

/// Frozen optimization instance at global tick k.
OpfInstance make_instance(const Scenario& scn, int k);

/// Smooth diurnal base plus a bounded seeded random walk, clamped at zero.
Eigen::VectorXd synthesize_series(int horizon, double base, double diurnal_amp,
                                  double walk_sigma, double day_fraction, uint64_t seed);

struct TickRecord {
    int k = 0;
    Eigen::VectorXd rho;              // full N magnitudes at start of tick
    Eigen::VectorXd u;                // setpoints after the tick's updates
    Eigen::VectorXd gamma, mu;        // aggregator duals after the tick
    std::vector<uint8_t> delivered;   // per DER
    std::vector<int> staleness;       // k - l_i, per DER
    Eigen::VectorXd stale_grad_err;   // per DER (feedback policy)
    double cost = 0.0;
};

struct RunResult {
    std::vector<TickRecord> ticks;
    std::vector<Eigen::VectorXd> z;         // stacked state after each tick
    std::vector<Eigen::VectorXd> z_star;    // oracle, when analysis enabled
    std::vector<Eigen::VectorXd> p_av;      // per tick, Ng
    std::vector<double> cost;               // per tick
    BoundsReport bounds;                    // populated when analysis enabled
    int max_channel_failure_streak = 0;
};

RunResult run(const Scenario& scn, Policy policy);
inline RunResult run(const Scenario& scn) { return run(scn, scn.cfg.policy); }

/// CSV trace emission (voltages, setpoints, duals, costs, errors, bounds).
void write_traces(const RunResult& result, const Scenario& scn, const std::string& out_dir);

}  // namespace derflow
