#include <cmath>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "dcopf/metrics.hpp"
#include "dcopf/oracle.hpp"
#include "dcopf/sim.hpp"

namespace dcopf {

namespace {

void add_run_options(CLI::App* cmd, ExperimentConfig& cfg,
                     std::string& variant) {
  cmd->add_option("--case", cfg.case_path, "network case file (json)")
      ->required();
  cmd->add_option("--horizon", cfg.horizon, "number of rounds")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", cfg.seed, "cost stream seed");
  cmd->add_option("--grad-variant", variant,
                  "dual gradient source: tilde (mixed) or raw (local)")
      ->check(CLI::IsMember({"tilde", "raw"}));
  cmd->add_option("--alpha-scale", cfg.schedule.alpha_scale, "alpha_t scale");
  cmd->add_option("--alpha-exp", cfg.schedule.alpha_exponent,
                  "alpha_t decay exponent");
  cmd->add_option("--beta-scale", cfg.schedule.beta_scale, "beta_t scale");
  cmd->add_option("--beta-exp", cfg.schedule.beta_exponent,
                  "beta_t decay exponent");
  cmd->add_option("--gamma-scale", cfg.schedule.gamma_scale, "gamma_t scale");
  cmd->add_option("--gamma-exp", cfg.schedule.gamma_exponent,
                  "gamma_t decay exponent");
  cmd->add_option("--delta-scale", cfg.schedule.delta_scale, "delta_t scale");
  cmd->add_option("--delta-exp", cfg.schedule.delta_exponent,
                  "delta_t decay exponent");
  cmd->add_option("--a-min", cfg.a_range[0], "quadratic coefficient lower bound");
  cmd->add_option("--a-max", cfg.a_range[1], "quadratic coefficient upper bound");
  cmd->add_option("--b-min", cfg.b_range[0], "linear coefficient lower bound");
  cmd->add_option("--b-max", cfg.b_range[1], "linear coefficient upper bound");
  cmd->add_option("--c-fixed", cfg.c_fixed, "constant cost term");
}

int do_run(const ExperimentConfig& cfg) {
  RunArtifacts art = run_experiment(cfg);
  const TheoremReport& r = art.report;
  std::printf("horizon %d, seed %llu, variant %s\n", cfg.horizon,
              static_cast<unsigned long long>(cfg.seed),
              cfg.variant == GradVariant::consensus_duals ? "tilde" : "raw");
  std::printf("regret: %s (avg %s)\n", format_sig12(art.regret_final).c_str(),
              format_sig12(art.regret_final / cfg.horizon).c_str());
  std::printf("violation: %s (avg %s)\n",
              format_sig12(art.violation_final).c_str(),
              format_sig12(art.violation_final / cfg.horizon).c_str());
  std::printf("checks: regret bound %s, violation bound %s, telescoping %s\n",
              r.regret_bound_ok ? "ok" : "FAIL",
              r.violation_bound_ok ? "ok" : "FAIL",
              r.telescoping_ok ? "ok" : "FAIL");
  std::printf("artifacts: %s, %s, %s\n", art.trace_csv.c_str(),
              art.curves_csv.c_str(), art.summary_json.c_str());
  std::printf("wall time: %.3f s\n", art.wall_seconds);
  bool fail = !r.regret_bound_ok || !r.violation_bound_ok || !r.telescoping_ok;
  return fail ? 1 : 0;
}

int do_validate(const std::string& case_path) {
  Network net;
  try {
    net = load_case(case_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "INVALID: %s\n", e.what());
    return 1;
  }
  ValidationReport rep = validate_network(net);
  std::printf("OK: %d buses, %zu lines, %zu generators\n", net.n_buses,
              net.lines.size(), net.generator_buses().size());
  std::printf("total capacity %s pu >= total load %s pu\n",
              format_sig12(rep.total_capacity_pu).c_str(),
              format_sig12(rep.total_load_pu).c_str());
  return 0;
}

int do_bounds(const ExperimentConfig& cfg, const std::string& theta_mode) {
  Network net = load_case(cfg.case_path);
  SystemModel model(net);
  CostStreamConfig stream = cfg.stream();
  RunTrace trace =
      simulate_rounds(model, cfg.schedule, stream, cfg.variant, cfg.horizon);
  ThetaMode mode =
      theta_mode == "empirical" ? ThetaMode::empirical : ThetaMode::fixed_pi;
  BoundConstants bc =
      bound_constants(net, model.B, model.W, stream, &trace, mode, cfg.horizon);
  auto line = [](const char* name, double v) {
    std::printf("%-16s %s\n", name, format_sig12(v).c_str());
  };
  line("C_P", bc.C_P);
  line("C_theta", bc.C_theta);
  line("C_lambda", bc.C_lambda);
  line("C_a", bc.C_a);
  line("C_b", bc.C_b);
  line("L_f", bc.L_f);
  line("B_infnorm", bc.B_infnorm);
  line("eta", bc.eta);
  line("kappa", bc.kappa);
  line("omega", bc.omega);
  line("sum_omega", bc.sum_omega);
  line("K1", bc.K1);
  line("K2", bc.K2);
  line("K3", bc.K3);
  line("K4", bc.K4);
  line("M1", bc.M1);
  std::printf("regret bound at T=%d: %s\n", cfg.horizon,
              format_sig12(regret_bound_value(bc, cfg.horizon)).c_str());
  std::printf("violation bound at T=%d: %s\n", cfg.horizon,
              format_sig12(bc.M1 * std::sqrt(double(cfg.horizon))).c_str());
  return 0;
}

int do_dispatch(const ExperimentConfig& cfg) {
  Network net = load_case(cfg.case_path);
  CostStreamConfig stream = cfg.stream();
  DispatchSolution sol = hindsight_dispatch(net, stream, cfg.horizon);
  std::vector<int> gens = net.generator_buses();
  double total = 0.0;
  for (size_t g = 0; g < gens.size(); ++g) {
    total += sol.p_star[g];
    std::printf("bus %lld: p* = %s pu (cap %s)\n",
                static_cast<long long>(net.bus_id(gens[g])),
                format_sig12(sol.p_star[g]).c_str(),
                format_sig12(net.gen_cap[gens[g]]).c_str());
  }
  std::printf("marginal price mu* = %s\n",
              format_sig12(sol.marginal_price).c_str());
  std::printf("total dispatch = %s pu (load %s pu)\n",
              format_sig12(total).c_str(),
              format_sig12(net.total_load()).c_str());
  std::printf("angles relative to slack bus %lld:\n",
              static_cast<long long>(net.bus_id(net.slack_bus)));
  for (int i = 0; i < net.n_buses; ++i)
    std::printf("bus %lld: theta* = %s rad\n",
                static_cast<long long>(net.bus_id(i)),
                format_sig12(sol.theta_star[i]).c_str());
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"distributed online primal-dual dispatch simulator"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string variant = "tilde";
  std::string theta_mode = "pi";
  std::string case_path;

  CLI::App* run = app.add_subcommand("run", "simulate and write artifacts");
  add_run_options(run, cfg, variant);
  run->add_option("--out", cfg.out_dir, "output directory");
  run->add_option("--stride", cfg.stride, "trace row thinning stride")
      ->check(CLI::PositiveNumber);

  CLI::App* validate =
      app.add_subcommand("validate", "check a case file and report problems");
  validate->add_option("--case", case_path, "network case file (json)")
      ->required();

  CLI::App* bounds =
      app.add_subcommand("bounds", "print bound constants for a run");
  add_run_options(bounds, cfg, variant);
  bounds->add_option("--theta-mode", theta_mode,
                     "angle bound source: pi or empirical")
      ->check(CLI::IsMember({"pi", "empirical"}));

  CLI::App* dispatch =
      app.add_subcommand("dispatch", "solve the hindsight dispatch problem");
  add_run_options(dispatch, cfg, variant);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  cfg.variant = variant == "raw" ? GradVariant::raw_duals
                                 : GradVariant::consensus_duals;

  try {
    if (app.got_subcommand(run)) return do_run(cfg);
    if (app.got_subcommand(validate)) return do_validate(case_path);
    if (app.got_subcommand(bounds)) return do_bounds(cfg, theta_mode);
    if (app.got_subcommand(dispatch)) return do_dispatch(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace dcopf
