#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "derflow/scenario.hpp"

using namespace derflow;

namespace {

void print_bounds(const BoundsReport& b) {
    std::printf("eta               %.6g\n", b.eta);
    std::printf("L_phi             %.6g\n", b.l_phi);
    std::printf("rho(alpha)        %.6g%s\n", b.rho_alpha,
                b.contraction ? "" : "   [warning: >= 1, tracking not guaranteed]");
    std::printf("alpha_max         %.6g\n", b.alpha_max);
    std::printf("G                 %.6g\n", b.g_norm);
    std::printf("K                 %.6g\n", b.k_lower);
    std::printf("Kbar              %.6g\n", b.k_upper);
    std::printf("e_d               %.6g\n", b.e_d);
    std::printf("e_u               %.6g\n", b.e_u);
    std::printf("e                 %.6g\n", b.e_total);
    std::printf("sigma_z           %.6g\n", b.sigma_z);
    std::printf("asymptotic bound  %.6g\n", b.asymptotic_bound);
    std::printf("X_i               ");
    for (int i = 0; i < b.x_i.size(); ++i) std::printf("%.4g ", b.x_i(i));
    std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feedback dispatch of DER setpoints on a distribution feeder"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", policy_override;
    uint64_t seed_override = 0;
    bool have_seed = false;

    auto* run_cmd = app.add_subcommand("run", "simulate a scenario and write CSV traces");
    run_cmd->add_option("--config", config_path, "scenario config file")->required();
    run_cmd->add_option("--policy", policy_override, "override the configured policy");
    run_cmd->add_option("--out-dir", out_dir, "trace output directory");
    auto* seed_opt = run_cmd->add_option("--seed", seed_override,
                                         "override channel/measure/series seeds");

    auto* bounds_cmd = app.add_subcommand("bounds", "print the tracking-bound report");
    bounds_cmd->add_option("--config", config_path, "scenario config file")->required();
    bounds_cmd->add_option("--policy", policy_override, "override the configured policy");

    auto* validate_cmd = app.add_subcommand("validate", "parse and validate a scenario");
    validate_cmd->add_option("--config", config_path, "scenario config file")->required();

    CLI11_PARSE(app, argc, argv);
    have_seed = seed_opt->count() > 0;

    try {
        Scenario scn = load_scenario(config_path);
        if (!policy_override.empty()) scn.cfg.policy = policy_from_string(policy_override);
        if (have_seed) {
            scn.cfg.channel_seed = mix_seed(seed_override, 1);
            scn.cfg.measure_seed = mix_seed(seed_override, 2);
        }

        if (validate_cmd->parsed()) {
            std::printf("ok: %d nodes (%d monitored), %zu DERs, horizon %d, policy %s\n",
                        scn.feeder.n(), static_cast<int>(scn.feeder.monitored.size()),
                        scn.feeder.ders.size(), scn.cfg.horizon,
                        to_string(scn.cfg.policy).c_str());
            return 0;
        }
        if (bounds_cmd->parsed()) {
            scn.cfg.analysis = true;
            RunResult res = run(scn);
            print_bounds(res.bounds);
            return 0;
        }
        // run
        RunResult res = run(scn);
        write_traces(res, scn, out_dir);
        double worst_rho = 0.0;
        for (const auto& t : res.ticks)
            for (int j : scn.feeder.monitored) worst_rho = std::max(worst_rho, t.rho(j - 1));
        std::printf("policy %s, %zu ticks, max monitored voltage %.5f pu, final cost %.6g\n",
                    to_string(scn.cfg.policy).c_str(), res.ticks.size(), worst_rho,
                    res.cost.empty() ? 0.0 : res.cost.back());
        if (scn.cfg.analysis) {
            auto err = tracking_error_series(res.z, res.z_star);
            std::printf("tracking error: final %.6g, limsup %.6g, bound %.6g\n", err.back(),
                        empirical_limsup(err, scn.cfg.burn_in < 0 ? 0 : scn.cfg.burn_in,
                                         scn.cfg.limsup_window),
                        res.bounds.asymptotic_bound);
        }
        std::printf("traces written to %s\n", out_dir.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
