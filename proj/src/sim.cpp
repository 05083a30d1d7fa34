#include "dcopf/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dcopf/oracle.hpp"
#include "dcopf/reference.hpp"

namespace dcopf {

using nlohmann::json;

CostStreamConfig ExperimentConfig::stream() const {
  CostStreamConfig s;
  s.a_range = a_range;
  s.b_range = b_range;
  s.c_fixed = c_fixed;
  s.seed = seed;
  s.horizon = horizon;
  return s;
}

std::string format_sig12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

double round_sig12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::strtod(buf, nullptr);
}

namespace {

const json& require_field(const json& j, const char* key) {
  if (!j.contains(key))
    throw std::runtime_error(std::string("case file missing field: ") + key);
  return j.at(key);
}

Network network_from_json(const json& doc) {
  if (!doc.is_object()) throw std::runtime_error("case file is not an object");

  double base_mva = require_field(doc, "base_mva").get<double>();
  if (!(base_mva > 0.0)) throw std::runtime_error("base_mva must be positive");

  const json& buses = require_field(doc, "buses");
  if (!buses.is_array() || buses.empty())
    throw std::runtime_error("buses must be a non-empty array");
  std::map<long long, int> index_of;
  std::vector<long long> ids;
  for (const json& b : buses) {
    long long id = b.get<long long>();
    if (!index_of.emplace(id, static_cast<int>(ids.size())).second)
      throw std::runtime_error("duplicate bus id in case file");
    ids.push_back(id);
  }
  auto lookup = [&index_of](long long id, const char* what) {
    auto it = index_of.find(id);
    if (it == index_of.end())
      throw std::runtime_error(std::string(what) +
                               " references unknown bus id " +
                               std::to_string(id));
    return it->second;
  };

  Network net;
  net.n_buses = static_cast<int>(ids.size());
  net.base_mva = base_mva;
  net.bus_ids = ids;
  net.slack_bus =
      lookup(require_field(doc, "slack_bus").get<long long>(), "slack_bus");
  net.gen_cap.assign(net.n_buses, 0.0);
  net.load.assign(net.n_buses, 0.0);

  for (const json& l : require_field(doc, "lines")) {
    Line line;
    line.from = lookup(require_field(l, "from").get<long long>(), "line");
    line.to = lookup(require_field(l, "to").get<long long>(), "line");
    line.reactance_pu = require_field(l, "reactance_pu").get<double>();
    net.lines.push_back(line);
  }
  for (const json& g : require_field(doc, "generators")) {
    int bus = lookup(require_field(g, "bus").get<long long>(), "generator");
    double cap = require_field(g, "p_max_mw").get<double>();
    if (!(cap > 0.0))
      throw std::runtime_error("generator p_max_mw must be positive");
    if (net.gen_cap[bus] > 0.0)
      throw std::runtime_error("duplicate generator entry for one bus");
    net.gen_cap[bus] = cap / base_mva;
  }
  for (const json& l : require_field(doc, "loads")) {
    int bus = lookup(require_field(l, "bus").get<long long>(), "load");
    double mw = require_field(l, "p_mw").get<double>();
    if (mw < 0.0) throw std::runtime_error("load p_mw must be nonnegative");
    if (net.load[bus] > 0.0)
      throw std::runtime_error("duplicate load entry for one bus");
    net.load[bus] = mw / base_mva;
  }

  ValidationReport rep = validate_network(net);
  if (!rep.ok) {
    std::ostringstream os;
    os << "case validation failed:";
    for (const auto& e : rep.errors) os << "\n  - " << e;
    throw std::runtime_error(os.str());
  }
  return net;
}

}  // namespace

Network load_case_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("case parse error: ") + e.what());
  }
  return network_from_json(doc);
}

Network load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open case file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_case_string(ss.str());
}

RunTrace simulate_rounds(const SystemModel& model, const StepSchedule& sched,
                         const CostStreamConfig& stream, GradVariant variant,
                         int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const int n = model.net.n_buses;
  std::vector<AgentState> states(n);
  RunTrace trace;
  trace.n_buses = n;
  trace.rounds.reserve(horizon);
  for (int t = 1; t <= horizon; ++t) {
    RoundCosts rc = sample_costs(stream, model.net, t);
    trace.rounds.push_back(
        run_round(model, states, rc, sched, t, variant));
  }
  trace.final_state = states;
  return trace;
}

namespace {

std::string variant_name(GradVariant v) {
  return v == GradVariant::consensus_duals ? "tilde" : "raw";
}

GradVariant variant_from_name(const std::string& s) {
  if (s == "tilde") return GradVariant::consensus_duals;
  if (s == "raw") return GradVariant::raw_duals;
  throw std::runtime_error("unknown grad variant: " + s);
}

json schedule_to_json(const StepSchedule& s) {
  return json{{"alpha_scale", s.alpha_scale},
              {"alpha_exponent", s.alpha_exponent},
              {"beta_scale", s.beta_scale},
              {"beta_exponent", s.beta_exponent},
              {"gamma_scale", s.gamma_scale},
              {"gamma_exponent", s.gamma_exponent},
              {"delta_scale", s.delta_scale},
              {"delta_exponent", s.delta_exponent}};
}

StepSchedule schedule_from_json(const json& j) {
  StepSchedule s;
  s.alpha_scale = j.value("alpha_scale", s.alpha_scale);
  s.alpha_exponent = j.value("alpha_exponent", s.alpha_exponent);
  s.beta_scale = j.value("beta_scale", s.beta_scale);
  s.beta_exponent = j.value("beta_exponent", s.beta_exponent);
  s.gamma_scale = j.value("gamma_scale", s.gamma_scale);
  s.gamma_exponent = j.value("gamma_exponent", s.gamma_exponent);
  s.delta_scale = j.value("delta_scale", s.delta_scale);
  s.delta_exponent = j.value("delta_exponent", s.delta_exponent);
  return s;
}

// Config echo keeps full-precision doubles so a reloaded config replays the
// run exactly; only derived metrics are rounded to 12 significant digits.
json config_to_json(const ExperimentConfig& cfg) {
  return json{{"case", cfg.case_path},
              {"horizon", cfg.horizon},
              {"seed", cfg.seed},
              {"schedule", schedule_to_json(cfg.schedule)},
              {"a_range", cfg.a_range},
              {"b_range", cfg.b_range},
              {"c_fixed", cfg.c_fixed},
              {"grad_variant", variant_name(cfg.variant)},
              {"out_dir", cfg.out_dir},
              {"stride", cfg.stride}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.case_path = j.value("case", cfg.case_path);
  cfg.horizon = j.value("horizon", cfg.horizon);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("schedule")) cfg.schedule = schedule_from_json(j.at("schedule"));
  cfg.a_range = j.value("a_range", cfg.a_range);
  cfg.b_range = j.value("b_range", cfg.b_range);
  cfg.c_fixed = j.value("c_fixed", cfg.c_fixed);
  cfg.variant = variant_from_name(j.value("grad_variant", std::string("tilde")));
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.stride = j.value("stride", cfg.stride);
  return cfg;
}

json constants_to_json(const BoundConstants& bc) {
  json j;
  j["C_P"] = round_sig12(bc.C_P);
  j["C_P_L"] = round_sig12(bc.C_P_L);
  j["C_theta"] = round_sig12(bc.C_theta);
  j["C_lambda"] = round_sig12(bc.C_lambda);
  j["C_a"] = round_sig12(bc.C_a);
  j["C_b"] = round_sig12(bc.C_b);
  j["L_f"] = round_sig12(bc.L_f);
  j["B_infnorm"] = round_sig12(bc.B_infnorm);
  j["eta"] = round_sig12(bc.eta);
  j["Q"] = bc.Q;
  j["kappa"] = round_sig12(bc.kappa);
  j["omega"] = round_sig12(bc.omega);
  j["sum_omega"] = round_sig12(bc.sum_omega);
  j["sum_omega_limit"] = round_sig12(bc.sum_omega_limit);
  j["K1"] = round_sig12(bc.K1);
  j["K2"] = round_sig12(bc.K2);
  j["K3"] = round_sig12(bc.K3);
  j["K4"] = round_sig12(bc.K4);
  j["K1_limit"] = round_sig12(bc.K1_limit);
  j["K3_limit"] = round_sig12(bc.K3_limit);
  j["M1"] = round_sig12(bc.M1);
  j["C_f"] = round_sig12(bc.C_f);
  j["C_h"] = round_sig12(bc.C_h);
  j["L_h_p"] = round_sig12(bc.L_h_p);
  j["L_h_theta"] = round_sig12(bc.L_h_theta);
  j["eval_T"] = bc.eval_T;
  return j;
}

json report_to_json(const TheoremReport& r) {
  json j;
  j["horizon"] = r.horizon;
  j["regret_bound_ok"] = r.regret_bound_ok;
  j["regret_min_margin"] = round_sig12(r.regret_min_margin);
  j["regret_min_margin_t"] = r.regret_min_margin_t;
  j["violation_bound_ok"] = r.violation_bound_ok;
  j["violation_min_margin"] = round_sig12(r.violation_min_margin);
  j["violation_min_margin_t"] = r.violation_min_margin_t;
  j["telescoping_max_abs"] = round_sig12(r.telescoping_max_abs);
  j["telescoping_ok"] = r.telescoping_ok;
  j["aggregate_imbalance"] = round_sig12(r.aggregate_imbalance);
  j["theta_sum_over_gamma"] = round_sig12(r.theta_sum_over_gamma);
  j["imbalance_premise_holds"] = r.imbalance_premise_holds;
  j["aggregate_bound_holds"] = r.aggregate_bound_holds;
  j["descent_ok"] = r.descent_ok;
  j["descent_min_margin"] = round_sig12(r.descent_min_margin);
  j["descent_min_margin_t"] = r.descent_min_margin_t;
  j["grad_theta_bound_violations"] = r.grad_theta_bound_violations;
  j["grad_lambda_bound_violations"] = r.grad_lambda_bound_violations;
  j["box_violations"] = r.box_violations;
  return j;
}

}  // namespace

std::string config_to_json_string(const ExperimentConfig& cfg) {
  return config_to_json(cfg).dump(2);
}

ExperimentConfig config_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  if (cfg.stride < 1) throw std::invalid_argument("stride must be >= 1");
  Network net = load_case(cfg.case_path);
  SystemModel model(net);
  CostStreamConfig stream = cfg.stream();

  auto t0 = std::chrono::steady_clock::now();
  RunTrace trace =
      simulate_rounds(model, cfg.schedule, stream, cfg.variant, cfg.horizon);
  auto t1 = std::chrono::steady_clock::now();

  DispatchSolution comparator = hindsight_dispatch(net, stream, cfg.horizon);
  std::vector<CurvePoint> curves =
      average_curves(trace, comparator, stream, net);
  BoundConstants bc_pi = bound_constants(net, model.B, model.W, stream, &trace,
                                         ThetaMode::fixed_pi, cfg.horizon);
  BoundConstants bc_emp = bound_constants(net, model.B, model.W, stream,
                                          &trace, ThetaMode::empirical,
                                          cfg.horizon);
  TheoremReport report = theorem_checks(trace, net, model.B, model.W, stream,
                                        comparator, ThetaMode::fixed_pi);

  RunArtifacts art;
  art.regret_final = static_regret(trace, comparator, stream, net);
  art.violation_final = constraint_violation(trace);
  art.report = report;
  art.constants = bc_pi;
  art.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const int n = net.n_buses;
  const int T = trace.horizon();

  {
    std::ofstream out(fs::path(cfg.out_dir) / "trace.csv");
    if (!out) throw std::runtime_error("cannot write trace.csv");
    out << "t,bus,p_pu,theta_rad,lambda,h_pu,cost\n";
    for (const TraceRow& row : trace.rounds) {
      if ((row.t - 1) % cfg.stride != 0 && row.t != T) continue;
      double shift = row.theta[net.slack_bus];
      for (int i = 0; i < n; ++i) {
        out << row.t << ',' << net.bus_id(i) << ','
            << format_sig12(row.p[i]) << ','
            << format_sig12(row.theta[i] - shift) << ','
            << format_sig12(row.lambda[i]) << ','
            << format_sig12(row.imbalance[i]) << ','
            << format_sig12(row.cost[i]) << '\n';
      }
    }
    art.trace_csv = (fs::path(cfg.out_dir) / "trace.csv").string();
  }
  {
    std::ofstream out(fs::path(cfg.out_dir) / "curves.csv");
    if (!out) throw std::runtime_error("cannot write curves.csv");
    out << "t,avg_regret,avg_violation,consensus_residual\n";
    for (const CurvePoint& pt : curves)
      out << pt.t << ',' << format_sig12(pt.avg_regret) << ','
          << format_sig12(pt.avg_violation) << ','
          << format_sig12(pt.consensus_residual) << '\n';
    art.curves_csv = (fs::path(cfg.out_dir) / "curves.csv").string();
  }
  {
    json summary;
    summary["config"] = config_to_json(cfg);
    summary["case"] = {{"n_buses", n},
                       {"n_generators", net.generator_buses().size()},
                       {"total_load_pu", round_sig12(net.total_load())},
                       {"total_capacity_pu", round_sig12(net.total_capacity())}};
    summary["metrics"] = {
        {"regret", round_sig12(art.regret_final)},
        {"violation", round_sig12(art.violation_final)},
        {"avg_regret", round_sig12(art.regret_final / T)},
        {"avg_violation", round_sig12(art.violation_final / T)},
        {"consensus_residual_final", round_sig12(consensus_residual(trace, T))}};
    json pstar = json::array();
    for (double p : comparator.p_star) pstar.push_back(round_sig12(p));
    summary["comparator"] = {
        {"marginal_price", round_sig12(comparator.marginal_price)},
        {"p_star", pstar}};
    summary["bounds"] = constants_to_json(bc_pi);
    summary["bounds_empirical_theta"] = constants_to_json(bc_emp);
    summary["theorem_checks"] = report_to_json(report);
    std::ofstream out(fs::path(cfg.out_dir) / "summary.json");
    if (!out) throw std::runtime_error("cannot write summary.json");
    out << summary.dump(2) << '\n';
    art.summary_json = (fs::path(cfg.out_dir) / "summary.json").string();
  }
  return art;
}

}  // namespace dcopf
