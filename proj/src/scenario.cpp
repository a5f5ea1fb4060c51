#include "derflow/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace derflow {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

ScenarioConfig ScenarioConfig::parse_text(std::istream& in, const std::string& name) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ScenarioError(name + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ScenarioError(name + ":" + std::to_string(lineno) + ": empty key or value");
        if (!kv.emplace(key, val).second)
            throw ScenarioError(name + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }

    ScenarioConfig cfg;
    auto take = [&](const char* key, auto& target) {
        auto it = kv.find(key);
        if (it == kv.end()) return;
        std::istringstream vs(it->second);
        using T = std::decay_t<decltype(target)>;
        if constexpr (std::is_same_v<T, std::string>) {
            target = it->second;
        } else if constexpr (std::is_same_v<T, std::optional<std::string>>) {
            target = it->second;
        } else if constexpr (std::is_same_v<T, Policy>) {
            target = policy_from_string(it->second);
        } else if constexpr (std::is_same_v<T, bool>) {
            if (it->second == "1" || it->second == "true") target = true;
            else if (it->second == "0" || it->second == "false") target = false;
            else throw ScenarioError(name + ": bad boolean for '" + std::string(key) + "'");
        } else {
            if (!(vs >> target) || !(vs >> std::ws).eof())
                throw ScenarioError(name + ": bad value for '" + std::string(key) + "'");
        }
        kv.erase(it);
    };
    take("feeder", cfg.feeder_path);
    take("horizon", cfg.horizon);
    take("tau", cfg.tau);
    take("tau_fast", cfg.tau_fast);
    take("policy", cfg.policy);
    take("alpha", cfg.alpha);
    take("nu", cfg.nu);
    take("epsilon", cfg.eps);
    take("d_gamma", cfg.d_gamma);
    take("d_mu", cfg.d_mu);
    take("vmin", cfg.v_min);
    take("vmax", cfg.v_max);
    take("cost_cp", cfg.cost_cp);
    take("cost_cq", cfg.cost_cq);
    take("p_loss", cfg.p_loss);
    take("e_max", cfg.e_max);
    take("channel_seed", cfg.channel_seed);
    take("noise_bound", cfg.noise_bound);
    take("measure_seed", cfg.measure_seed);
    take("series_seed", cfg.series_seed);
    take("load_scale", cfg.load_scale);
    take("load_diurnal_amp", cfg.load_diurnal_amp);
    take("load_walk_sigma", cfg.load_walk_sigma);
    take("pv_peak", cfg.pv_peak);
    take("pv_walk_sigma", cfg.pv_walk_sigma);
    take("day_fraction", cfg.day_fraction);
    take("load_series", cfg.load_series_path);
    take("pav_series", cfg.pav_series_path);
    take("pf_tol", cfg.pf_tol);
    take("pf_max_iter", cfg.pf_max_iter);
    take("oracle_tol", cfg.oracle_tol);
    take("oracle_max_iter", cfg.oracle_max_iter);
    take("analysis", cfg.analysis);
    take("linear_plant", cfg.linear_plant);
    take("start_at_available_power", cfg.start_at_available_power);
    take("burn_in", cfg.burn_in);
    take("limsup_window", cfg.limsup_window);
    if (!kv.empty())
        throw ScenarioError(name + ": unknown key '" + kv.begin()->first + "'");

    if (cfg.horizon < 1) throw ScenarioError(name + ": horizon must be positive");
    if (cfg.tau <= 0.0 || cfg.tau_fast <= 0.0)
        throw ScenarioError(name + ": periods must be positive");
    const double ratio = cfg.tau / cfg.tau_fast;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
        throw ScenarioError(name + ": tau_fast must divide tau");
    if (cfg.alpha <= 0.0 || cfg.nu <= 0.0 || cfg.eps <= 0.0)
        throw ScenarioError(name + ": alpha, nu, epsilon must be positive");
    if (cfg.d_gamma <= 0.0 || cfg.d_mu <= 0.0)
        throw ScenarioError(name + ": dual boxes must be positive");
    if (cfg.cost_cp < 0.0 || cfg.cost_cq < 0.0)
        throw ScenarioError(name + ": cost coefficients must be nonnegative");
    if (cfg.p_loss < 0.0 || cfg.p_loss > 1.0)
        throw ScenarioError(name + ": p_loss must lie in [0, 1]");
    if (cfg.noise_bound < 0.0) throw ScenarioError(name + ": noise_bound must be nonnegative");
    return cfg;
}

ScenarioConfig ScenarioConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open config file '" + path + "'");
    return parse_text(in, path);
}

int Scenario::ticks_per_global() const {
    return static_cast<int>(std::round(cfg.tau / cfg.tau_fast));
}

Eigen::VectorXd synthesize_series(int horizon, double base, double diurnal_amp,
                                  double walk_sigma, double day_fraction, uint64_t seed) {
    Eigen::VectorXd out(horizon);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double walk = 0.0;
    for (int k = 0; k < horizon; ++k) {
        const double frac = day_fraction + static_cast<double>(k) / 86400.0;
        const double diurnal = 1.0 + diurnal_amp * std::cos(2.0 * M_PI * (frac - 0.75));
        walk = std::clamp(walk + walk_sigma * unif(rng), -0.2, 0.2);
        out(k) = std::max(0.0, base * diurnal * (1.0 + walk));
    }
    return out;
}

namespace {

double irradiance_shape(double day_fraction) {
    if (day_fraction < 0.25 || day_fraction > 0.75) return 0.0;
    return std::sin(M_PI * (day_fraction - 0.25) / 0.5);
}

Eigen::MatrixXd read_series_csv(const std::string& path, int horizon, int cols) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open series file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ScenarioError(path + ": empty series file");
    Eigen::MatrixXd out(horizon, cols);
    int row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (row >= horizon) throw ScenarioError(path + ": more rows than the horizon");
        std::istringstream ls(line);
        std::string cell;
        for (int c = 0; c < cols; ++c) {
            if (!std::getline(ls, cell, ','))
                throw ScenarioError(path + ":" + std::to_string(row + 2) + ": missing column " +
                                    std::to_string(c + 1));
            try {
                out(row, c) = std::stod(cell);
            } catch (const std::exception&) {
                throw ScenarioError(path + ":" + std::to_string(row + 2) + ": bad number '" +
                                    cell + "'");
            }
        }
        ++row;
    }
    if (row != horizon)
        throw ScenarioError(path + ": series length " + std::to_string(row) +
                            " does not match horizon " + std::to_string(horizon));
    return out;
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& cfg, FeederModel feeder) {
    Scenario scn;
    scn.cfg = cfg;
    scn.feeder = std::move(feeder);
    scn.feeder.validate();
    if (scn.feeder.monitored.empty())
        for (int i = 1; i <= scn.feeder.n(); ++i) scn.feeder.monitored.push_back(i);
    scn.adm = build_admittance(scn.feeder);
    scn.lin = build_linear_model(scn.adm, scn.feeder.slack_voltage);
    scn.sens = slice_sensitivities(scn.lin, scn.feeder.monitored, scn.feeder.der_nodes());

    const int n = scn.feeder.n();
    const int ng = static_cast<int>(scn.feeder.ders.size());
    const int horizon = cfg.horizon;

    if (cfg.load_series_path) {
        Eigen::MatrixXd both = read_series_csv(*cfg.load_series_path, horizon, 2 * n);
        scn.load_p = both.leftCols(n);
        scn.load_q = both.rightCols(n);
    } else {
        scn.load_p = Eigen::MatrixXd::Zero(horizon, n);
        scn.load_q = Eigen::MatrixXd::Zero(horizon, n);
        for (const auto& l : scn.feeder.base_loads) {
            const uint64_t seed = mix_seed(cfg.series_seed, 0x10ad, l.node);
            Eigen::VectorXd s = synthesize_series(horizon, cfg.load_scale, cfg.load_diurnal_amp,
                                                  cfg.load_walk_sigma, cfg.day_fraction, seed);
            scn.load_p.col(l.node - 1) += l.p * s;
            scn.load_q.col(l.node - 1) += l.q * s;
        }
    }

    if (cfg.pav_series_path) {
        scn.p_av = read_series_csv(*cfg.pav_series_path, horizon, ng);
    } else {
        scn.p_av.resize(horizon, ng);
        for (int i = 0; i < ng; ++i) {
            const auto& d = scn.feeder.ders[i];
            const uint64_t seed = mix_seed(cfg.series_seed, 0x50fa, d.node);
            Eigen::VectorXd walk = synthesize_series(horizon, 1.0, 0.0, cfg.pv_walk_sigma,
                                                     cfg.day_fraction, seed);
            for (int k = 0; k < horizon; ++k) {
                const double frac = cfg.day_fraction + static_cast<double>(k) / 86400.0;
                scn.p_av(k, i) = std::min(
                    d.s_rating, d.s_rating * cfg.pv_peak * irradiance_shape(frac) * walk(k));
            }
        }
    }

    for (int k = 0; k < horizon; ++k)
        for (int i = 0; i < ng; ++i) {
            if (scn.p_av(k, i) > scn.feeder.ders[i].s_rating + 1e-12)
                throw ScenarioError("available power exceeds rating for DER " +
                                    std::to_string(i) + " at tick " + std::to_string(k));
            if (scn.p_av(k, i) < scn.feeder.ders[i].p_min)
                throw ScenarioError("available power below p_min for DER " + std::to_string(i) +
                                    " at tick " + std::to_string(k));
        }

    if (cfg.policy == Policy::feedback_fast) {
        for (const auto& d : scn.feeder.ders) {
            bool found = false;
            for (int m : scn.feeder.monitored) found |= (m == d.node);
            if (!found)
                throw ScenarioError("fast-local policy requires every DER node monitored; node " +
                                    std::to_string(d.node) + " is not");
        }
    }
    return scn;
}

Scenario load_scenario(const std::string& config_path) {
    ScenarioConfig cfg = ScenarioConfig::parse_file(config_path);
    if (cfg.feeder_path.empty()) throw ScenarioError(config_path + ": missing 'feeder' key");
    std::filesystem::path fp(cfg.feeder_path);
    if (fp.is_relative()) fp = std::filesystem::path(config_path).parent_path() / fp;
    return build_scenario(cfg, parse_feeder_file(fp.string()));
}

OpfInstance make_instance(const Scenario& scn, int k) {
    if (k < 0 || k >= scn.cfg.horizon) throw ScenarioError("tick index out of range");
    OpfInstance inst;
    inst.Rg = scn.sens.Rg;
    inst.Bg = scn.sens.Bg;
    inst.c = constraint_offsets(scn.sens, scn.load_p.row(k).transpose(),
                                scn.load_q.row(k).transpose());
    const int ng = static_cast<int>(scn.feeder.ders.size());
    inst.pl_der.resize(ng);
    inst.ql_der.resize(ng);
    inst.caps.resize(ng);
    inst.cost.terms.resize(ng);
    for (int i = 0; i < ng; ++i) {
        const auto& d = scn.feeder.ders[i];
        inst.pl_der(i) = scn.load_p(k, d.node - 1);
        inst.ql_der(i) = scn.load_q(k, d.node - 1);
        inst.caps[i] = Capability{d.p_min, scn.p_av(k, i), d.s_rating};
        inst.cost.terms[i] = CostTerm{scn.cfg.cost_cp, scn.cfg.cost_cq};
    }
    inst.reg = RegularizationParams{scn.cfg.nu, scn.cfg.eps, scn.cfg.alpha, scn.cfg.d_gamma,
                                    scn.cfg.d_mu};
    inst.v_min = scn.cfg.v_min;
    inst.v_max = scn.cfg.v_max;
    return inst;
}

namespace {

struct Plant {
    const Scenario& scn;
    PowerFlowSolver solver;
    Eigen::VectorXcd last_v;
    Eigen::VectorXd c_cache;
    int c_tick = -1;

    explicit Plant(const Scenario& s)
        : scn(s), solver(s.adm, s.feeder.slack_voltage), last_v(solver.no_load_voltage()) {}

    /// Injections from setpoints u (2Ng) and the tick-k loads.
    InjectionProfile injections(const Eigen::VectorXd& u, int k) const {
        const int n = scn.feeder.n();
        InjectionProfile inj;
        inj.p = -scn.load_p.row(k).transpose();
        inj.q = -scn.load_q.row(k).transpose();
        for (size_t i = 0; i < scn.feeder.ders.size(); ++i) {
            const int node = scn.feeder.ders[i].node - 1;
            inj.p(node) += u(2 * i);
            inj.q(node) += u(2 * i + 1);
        }
        (void)n;
        return inj;
    }

    VoltageSolution solve(const Eigen::VectorXd& u, int k) {
        if (scn.cfg.linear_plant) {
            const InjectionProfile inj = injections(u, k);
            VoltageSolution sol;
            sol.rho = scn.lin.a + scn.lin.R * inj.p + scn.lin.B * inj.q;
            sol.v = scn.lin.b + scn.lin.H * inj.p.cast<std::complex<double>>() +
                    scn.lin.J * inj.q.cast<std::complex<double>>();
            // Monitored entries reproduce the controller-side affine route
            // float-for-float, so a noiseless measurement equals the model
            // evaluation exactly.
            if (c_tick != k) {
                c_cache = constraint_offsets(scn.sens, scn.load_p.row(k).transpose(),
                                             scn.load_q.row(k).transpose());
                c_tick = k;
            }
            const int ng = static_cast<int>(scn.feeder.ders.size());
            Eigen::VectorXd dp(ng), dq(ng);
            for (int i = 0; i < ng; ++i) {
                const int node = scn.feeder.ders[i].node - 1;
                dp(i) = u(2 * i) - scn.load_p(k, node);
                dq(i) = u(2 * i + 1) - scn.load_q(k, node);
            }
            const Eigen::VectorXd rho_m = c_cache + scn.sens.Rg * dp + scn.sens.Bg * dq;
            for (size_t j = 0; j < scn.feeder.monitored.size(); ++j)
                sol.rho(scn.feeder.monitored[j] - 1) = rho_m(static_cast<int>(j));
            sol.converged = true;
            return sol;
        }
        VoltageSolution sol =
            solver.solve_from(last_v, injections(u, k), scn.cfg.pf_tol, scn.cfg.pf_max_iter);
        last_v = sol.v;
        return sol;
    }
};

void assert_duals_inside_box(const ControllerState& st, const RegularizationParams& reg, int k) {
    if ((st.gamma.array() >= reg.d_gamma - 1e-12).any() ||
        (st.mu.array() >= reg.d_mu - 1e-12).any())
        throw ScenarioError("dual iterate hit the box at tick " + std::to_string(k) +
                            "; enlarge d_gamma/d_mu");
}

}  // namespace

RunResult run(const Scenario& scn, Policy policy) {
    const int horizon = scn.cfg.horizon;
    const int n_fast = scn.ticks_per_global();
    const int ng = static_cast<int>(scn.feeder.ders.size());
    const int m = static_cast<int>(scn.feeder.monitored.size());

    // monitored position of each DER node (-1 when unmonitored)
    std::vector<int> der_monitor_pos(ng, -1);
    for (int i = 0; i < ng; ++i)
        for (int j = 0; j < m; ++j)
            if (scn.feeder.monitored[j] == scn.feeder.ders[i].node) der_monitor_pos[i] = j;
    std::vector<int> der_node_list(ng);
    for (int i = 0; i < ng; ++i) der_node_list[i] = scn.feeder.ders[i].node;

    Plant plant(scn);
    BroadcastChannel channel(std::vector<double>(ng, scn.cfg.p_loss), scn.cfg.e_max,
                             scn.cfg.channel_seed);

    RunResult result;
    result.ticks.reserve(horizon);
    std::vector<OpfInstance> instances;
    if (scn.cfg.analysis) instances.reserve(horizon);

    OpfInstance inst0 = make_instance(scn, 0);
    ControllerState st = make_controller_state(inst0, scn.cfg.start_at_available_power);
    Eigen::VectorXd warm;

    for (int k = 0; k < horizon; ++k) {
        OpfInstance inst = make_instance(scn, k);
        for (const auto& cap : inst.caps) cap.validate();

        VoltageSolution sol;
        try {
            sol = plant.solve(st.u, k);
        } catch (const PowerFlowError& e) {
            throw ScenarioError("power flow diverged at tick " + std::to_string(k) + ": " +
                                e.what());
        }

        TickRecord rec;
        rec.k = k;
        rec.rho = sol.rho;
        rec.delivered.assign(ng, 1);
        rec.stale_grad_err = Eigen::VectorXd::Zero(ng);

        const Eigen::VectorXd meas =
            measure_voltages(sol, scn.feeder.monitored, scn.cfg.noise_bound,
                             mix_seed(scn.cfg.measure_seed, k, 0));

        switch (policy) {
            case Policy::synchronous: {
                primal_dual_step(st, inst);
                break;
            }
            case Policy::feedback: {
                rec.delivered = channel.attempt_broadcast();
                rec.stale_grad_err = feedback_step(st, inst, meas, rec.delivered);
                break;
            }
            case Policy::feedback_fast: {
                rec.delivered = channel.attempt_broadcast();
                rec.stale_grad_err = stale_gradient_error(st, inst);
                primal_step_with_stale(st, inst);
                dual_step_from_measurements(st, inst, meas);
                deliver_duals(st, rec.delivered);
                for (int i = 0; i < ng; ++i)
                    if (!rec.delivered[i])
                        local_dual_update(st, inst, i, der_monitor_pos[i],
                                          meas(der_monitor_pos[i]));
                for (int f = 1; f < n_fast; ++f) {
                    try {
                        sol = plant.solve(st.u, k);
                    } catch (const PowerFlowError& e) {
                        throw ScenarioError("power flow diverged at tick " + std::to_string(k) +
                                            " (fast " + std::to_string(f) + "): " + e.what());
                    }
                    const Eigen::VectorXd m_local =
                        measure_voltages(sol, der_node_list, scn.cfg.noise_bound,
                                         mix_seed(scn.cfg.measure_seed, k, f));
                    for (int i = 0; i < ng; ++i)
                        local_dual_update(st, inst, i, der_monitor_pos[i], m_local(i));
                    primal_step_with_stale(st, inst);
                }
                break;
            }
            case Policy::voltvar: {
                for (int f = 0; f < n_fast; ++f) {
                    if (f > 0) {
                        try {
                            sol = plant.solve(st.u, k);
                        } catch (const PowerFlowError& e) {
                            throw ScenarioError("power flow diverged at tick " +
                                                std::to_string(k) + " (fast " +
                                                std::to_string(f) + "): " + e.what());
                        }
                    }
                    const Eigen::VectorXd m_local =
                        measure_voltages(sol, der_node_list, scn.cfg.noise_bound,
                                         mix_seed(scn.cfg.measure_seed, k, f));
                    for (int i = 0; i < ng; ++i) {
                        st.u(2 * i) = inst.caps[i].p_av;
                        st.u(2 * i + 1) = voltvar_setpoint_q(m_local(i), inst.caps[i]);
                    }
                }
                ++st.k;
                break;
            }
        }

        if (policy == Policy::feedback || policy == Policy::feedback_fast)
            assert_duals_inside_box(st, inst.reg, k);

        rec.staleness.resize(ng);
        for (int i = 0; i < ng; ++i) {
            rec.staleness[i] = static_cast<int>(st.k - st.last_delivery[i]);
            if (policy == Policy::feedback && rec.staleness[i] > scn.cfg.e_max)
                throw ScenarioError("staleness cap violated at tick " + std::to_string(k));
        }

        rec.u = st.u;
        rec.gamma = st.gamma;
        rec.mu = st.mu;
        Eigen::VectorXd z(2 * ng + 2 * m);
        z << st.u, st.gamma, st.mu;
        result.z.push_back(z);
        result.p_av.push_back(scn.p_av.row(k).transpose());

        if (scn.cfg.analysis) {
            SaddlePoint sp = solve_saddle_oracle(inst, scn.cfg.oracle_tol, scn.cfg.oracle_max_iter,
                                                 warm.size() ? &warm : nullptr);
            warm = sp.z();
            result.z_star.push_back(warm);
            instances.push_back(inst);
        }

        result.ticks.push_back(std::move(rec));
    }

    {
        std::vector<Eigen::VectorXd> u_series(horizon);
        for (int k = 0; k < horizon; ++k) u_series[k] = result.ticks[k].u;
        CostModel cost;
        cost.terms.assign(ng, CostTerm{scn.cfg.cost_cp, scn.cfg.cost_cq});
        result.cost = cost_series(u_series, result.p_av, cost, policy == Policy::voltvar);
        for (int k = 0; k < horizon; ++k) result.ticks[k].cost = result.cost[k];
    }

    result.max_channel_failure_streak = channel.max_consecutive_failures();

    if (scn.cfg.analysis) {
        double e_staleness = 0.0;
        if (policy == Policy::feedback) e_staleness = scn.cfg.e_max;
        if (policy == Policy::feedback_fast)
            e_staleness = (scn.cfg.e_max + 1) * n_fast - 1;
        result.bounds = compute_constants(instances, scn.sens.x_norm,
                                          Eigen::VectorXd::Constant(ng, e_staleness),
                                          scn.cfg.noise_bound, measure_sigma_z(result.z_star));
    }
    return result;
}

namespace {

struct CsvWriter {
    std::ofstream out;
    explicit CsvWriter(const std::filesystem::path& p) : out(p) {
        if (!out) throw ScenarioError("cannot open output file " + p.string());
    }
    void field(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << ',' << buf;
    }
    void row_start(int k) { out << k; }
    void row_end() { out << '\n'; }
};

}  // namespace

void write_traces(const RunResult& result, const Scenario& scn, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const int n = scn.feeder.n();
    const int ng = static_cast<int>(scn.feeder.ders.size());
    const int m = static_cast<int>(scn.feeder.monitored.size());

    {
        CsvWriter w(fs::path(out_dir) / "voltages.csv");
        w.out << "k";
        for (int i = 1; i <= n; ++i) w.out << ",rho_" << i;
        w.out << '\n';
        for (const auto& t : result.ticks) {
            w.row_start(t.k);
            for (int i = 0; i < n; ++i) w.field(t.rho(i));
            w.row_end();
        }
    }
    {
        CsvWriter w(fs::path(out_dir) / "setpoints.csv");
        w.out << "k";
        for (int i = 0; i < ng; ++i)
            w.out << ",p_" << scn.feeder.ders[i].node << ",q_" << scn.feeder.ders[i].node;
        w.out << '\n';
        for (const auto& t : result.ticks) {
            w.row_start(t.k);
            for (int i = 0; i < 2 * ng; ++i) w.field(t.u(i));
            w.row_end();
        }
    }
    {
        CsvWriter w(fs::path(out_dir) / "duals.csv");
        w.out << "k";
        for (int j = 0; j < m; ++j) w.out << ",gamma_" << scn.feeder.monitored[j];
        for (int j = 0; j < m; ++j) w.out << ",mu_" << scn.feeder.monitored[j];
        w.out << '\n';
        for (const auto& t : result.ticks) {
            w.row_start(t.k);
            for (int j = 0; j < m; ++j) w.field(t.gamma(j));
            for (int j = 0; j < m; ++j) w.field(t.mu(j));
            w.row_end();
        }
    }
    {
        CsvWriter w(fs::path(out_dir) / "costs.csv");
        w.out << "k,cost\n";
        for (const auto& t : result.ticks) {
            w.row_start(t.k);
            w.field(t.cost);
            w.row_end();
        }
    }
    {
        CsvWriter w(fs::path(out_dir) / "errors.csv");
        w.out << "k,tracking_error,stale_grad_err_max,staleness_max\n";
        std::vector<double> tracking;
        if (!result.z_star.empty()) tracking = tracking_error_series(result.z, result.z_star);
        for (size_t k = 0; k < result.ticks.size(); ++k) {
            const auto& t = result.ticks[k];
            w.row_start(t.k);
            w.field(tracking.empty() ? 0.0 : tracking[k]);
            w.field(t.stale_grad_err.size() ? t.stale_grad_err.maxCoeff() : 0.0);
            int worst = 0;
            for (int s : t.staleness) worst = std::max(worst, s);
            w.field(static_cast<double>(worst));
            w.row_end();
        }
    }
    {
        CsvWriter w(fs::path(out_dir) / "bounds.csv");
        const auto& b = result.bounds;
        w.out << "eta,l_phi,rho_alpha,alpha_max,contraction,g_norm,k_lower,k_upper,e_d,e_u,"
                 "e_total,sigma_z,asymptotic_bound\n";
        char buf[512];
        std::snprintf(buf, sizeof(buf),
                      "%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      b.eta, b.l_phi, b.rho_alpha, b.alpha_max, b.contraction ? 1 : 0, b.g_norm,
                      b.k_lower, b.k_upper, b.e_d, b.e_u, b.e_total, b.sigma_z,
                      b.asymptotic_bound);
        w.out << buf;
    }
}

}  // namespace derflow
