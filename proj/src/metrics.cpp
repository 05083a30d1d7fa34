#include "dcopf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dcopf/algorithm.hpp"

namespace dcopf {

double static_regret(const RunTrace& trace, const DispatchSolution& comparator,
                     const CostStreamConfig& stream, const Network& net) {
  std::vector<int> gens = net.generator_buses();
  if (comparator.p_star.size() != gens.size())
    throw std::invalid_argument("comparator size mismatch");
  double run_cost = 0.0, comp_cost = 0.0;
  for (const TraceRow& row : trace.rounds) {
    for (double c : row.cost) run_cost += c;
    RoundCosts rc = sample_costs(stream, net, row.t);
    for (size_t g = 0; g < gens.size(); ++g)
      comp_cost += evaluate_cost(rc, gens[g], comparator.p_star[g]);
  }
  return run_cost - comp_cost;
}

double constraint_violation(const RunTrace& trace) {
  double cum = 0.0;
  for (const TraceRow& row : trace.rounds) {
    double s = 0.0;
    for (double h : row.imbalance) s += h;
    cum += s;
  }
  return std::abs(cum);
}

double consensus_residual(const RunTrace& trace, int t) {
  if (t < 1 || t > trace.horizon())
    throw std::out_of_range("round index outside the trace");
  const std::vector<double>& lam = trace.rounds[t - 1].lambda;
  double mean = 0.0;
  for (double v : lam) mean += v;
  mean /= static_cast<double>(lam.size());
  double dev = 0.0;
  for (double v : lam) dev = std::max(dev, std::abs(v - mean));
  return dev;
}

std::pair<double, double> kappa_omega(double eta, int n_agents, int Q) {
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("eta must lie in (0, 1]");
  if (n_agents < 1) throw std::invalid_argument("need at least one agent");
  if (Q < 1) throw std::invalid_argument("Q must be >= 1");
  double nn = static_cast<double>(n_agents);
  double base = 1.0 - eta / (2.0 * nn * nn);
  double kappa = 1.0 / (base * base);
  double omega = std::pow(base, 1.0 / static_cast<double>(Q));
  return {kappa, omega};
}

double partial_omega_sum(double omega, int eval_T) {
  int m = eval_T - 2;
  if (m <= 0) return 0.0;
  if (std::abs(1.0 - omega) < 1e-15) return static_cast<double>(m);
  return omega * (1.0 - std::pow(omega, m)) / (1.0 - omega);
}

// The grouped constants of the regret bound. S = C_P + 2*C_theta*||B|| caps
// |grad_lambda L|; G = 3*C_P + 2*C_theta*||B|| multiplies the accumulated
// dual consensus error, whose geometric tail contributes both the
// omega/(1-omega) limit term and the partial-sum terms.
KValues bound_k_values(int n_agents, double C_P, double C_th, double C_l,
                       double L_f, double Binf, double kappa, double omega,
                       double sum_omega) {
  double N = n_agents;
  double S = C_P + 2.0 * C_th * Binf;
  double G = 3.0 * C_P + 2.0 * C_th * Binf;
  double N2 = N * N;
  KValues k;
  k.K1 = -0.5 * N * (L_f + C_l) * (L_f + C_l) - N * S * S +
         6.0 * N * C_l * C_l * Binf * Binf + 2.0 * N * C_l * Binf * S -
         4.0 * N * C_l * C_l * Binf +
         G * (2.0 * N * C_l + kappa * N2 * omega * C_l / (1.0 - omega) +
              4.0 * N * C_l * Binf - 2.0 * N * S -
              kappa * N2 * S * sum_omega +
              2.0 * kappa * N2 * C_l * Binf * sum_omega);
  k.K2 = 2.0 * N * (C_P * C_P + C_l * C_l) +
         N * (L_f + C_l) * (L_f + C_l) + 8.0 * N * C_l * C_l * Binf +
         2.0 * N * S * S + 2.0 * G * S * (2.0 * N + kappa * N2);
  k.K3 = 2.0 * N * C_l * Binf * S +
         G * (4.0 * N * C_l * Binf + 2.0 * kappa * N2 * C_l * Binf * sum_omega);
  k.K4 = -4.0 * N * C_l * C_l * Binf * Binf;
  return k;
}

BoundConstants bound_constants(const Network& net, const SusceptanceMatrix& B,
                               const WeightMatrix& W,
                               const CostStreamConfig& stream,
                               const RunTrace* trace, ThetaMode theta_mode,
                               int eval_T) {
  if (eval_T < 1) throw std::invalid_argument("eval_T must be >= 1");
  BoundConstants bc;
  const int n = net.n_buses;

  for (int i = 0; i < n; ++i) {
    bc.C_P = std::max(bc.C_P, net.gen_cap[i]);
    bc.C_P_L = std::max(bc.C_P_L, net.load[i]);
  }
  bc.C_a = stream.a_range[1];
  bc.C_b = std::max(std::abs(stream.b_range[0]), std::abs(stream.b_range[1]));
  bc.L_f = 2.0 * bc.C_a * bc.C_P + bc.C_b;
  bc.B_infnorm = infinity_norm(B);
  bc.eta = W.eta;
  bc.Q = 1;
  std::tie(bc.kappa, bc.omega) = kappa_omega(bc.eta, n, bc.Q);

  if (theta_mode == ThetaMode::empirical && trace == nullptr)
    throw std::invalid_argument("empirical theta mode requires a trace");
  int rows = trace ? std::min(eval_T, trace->horizon()) : 0;
  if (trace) {
    for (int r = 0; r < rows; ++r)
      for (double l : trace->rounds[r].lambda)
        bc.C_lambda = std::max(bc.C_lambda, std::abs(l));
  }
  if (theta_mode == ThetaMode::fixed_pi) {
    bc.C_theta = std::numbers::pi;
  } else {
    for (int r = 0; r < rows; ++r)
      for (double th : trace->rounds[r].theta)
        bc.C_theta = std::max(bc.C_theta, std::abs(th));
    if (eval_T >= trace->horizon())
      for (const AgentState& s : trace->final_state)
        bc.C_theta = std::max(bc.C_theta, std::abs(s.theta));
  }

  bc.sum_omega = partial_omega_sum(bc.omega, eval_T);
  bc.sum_omega_limit = bc.omega / (1.0 - bc.omega);
  double nd = static_cast<double>(n);
  KValues k = bound_k_values(n, bc.C_P, bc.C_theta, bc.C_lambda, bc.L_f, bc.B_infnorm,
                     bc.kappa, bc.omega, bc.sum_omega);
  bc.K1 = k.K1;
  bc.K2 = k.K2;
  bc.K3 = k.K3;
  bc.K4 = k.K4;
  KValues kl = bound_k_values(n, bc.C_P, bc.C_theta, bc.C_lambda, bc.L_f, bc.B_infnorm,
                      bc.kappa, bc.omega, bc.sum_omega_limit);
  bc.K1_limit = kl.K1;
  bc.K3_limit = kl.K3;
  bc.M1 = nd * bc.C_theta;

  bc.C_f = bc.C_a * bc.C_P * bc.C_P + bc.C_b * bc.C_P + std::abs(stream.c_fixed);
  bc.C_h = bc.C_P + 2.0 * bc.C_theta * bc.B_infnorm;
  bc.L_h_p = 1.0;
  bc.L_h_theta = bc.B_infnorm;
  bc.eval_T = eval_T;
  return bc;
}

double regret_bound_value(const BoundConstants& k, double t) {
  return k.K1 + k.K2 * std::sqrt(t) + k.K3 * std::log(t) + k.K4 / std::sqrt(t);
}

TheoremReport theorem_checks(const RunTrace& trace, const Network& net,
                             const SusceptanceMatrix& B, const WeightMatrix& W,
                             const CostStreamConfig& stream,
                             const DispatchSolution& comparator,
                             ThetaMode theta_mode) {
  const int n = net.n_buses;
  const int T = trace.horizon();
  if (T < 1) throw std::invalid_argument("empty trace");
  std::vector<int> gens = net.generator_buses();
  if (comparator.p_star.size() != gens.size() ||
      static_cast<int>(comparator.theta_star.size()) != n)
    throw std::invalid_argument("comparator size mismatch");

  TheoremReport rep;
  rep.horizon = T;
  const double nd = static_cast<double>(n);
  const double pi = std::numbers::pi;

  double C_P = 0.0, C_P_L = 0.0;
  for (int i = 0; i < n; ++i) {
    C_P = std::max(C_P, net.gen_cap[i]);
    C_P_L = std::max(C_P_L, net.load[i]);
  }
  double C_a = stream.a_range[1];
  double C_b =
      std::max(std::abs(stream.b_range[0]), std::abs(stream.b_range[1]));
  double L_f = 2.0 * C_a * C_P + C_b;
  double Binf = infinity_norm(B);
  auto [kappa, omega] = kappa_omega(W.eta, n, 1);

  // Global dual magnitude for the descent diagnostic (a run-level constant).
  double C_lam_global = 0.0;
  for (const TraceRow& row : trace.rounds)
    for (double l : row.lambda)
      C_lam_global = std::max(C_lam_global, std::abs(l));

  // Comparator dispatch mapped onto buses.
  std::vector<double> p_star_bus(n, 0.0);
  for (size_t g = 0; g < gens.size(); ++g)
    p_star_bus[gens[g]] = comparator.p_star[g];

  double cum_regret = 0.0, cum_h = 0.0;
  double run_C_lam = 0.0, run_C_th = 0.0, run_C_lt = 0.0;
  std::vector<double> tele(n, 0.0);
  std::vector<double> p_final(n);
  for (int i = 0; i < n; ++i) p_final[i] = trace.final_state[i].p_g;
  bool premise = true;

  rep.regret_bound_ok = true;
  rep.violation_bound_ok = true;
  rep.descent_ok = true;

  for (int r = 0; r < T; ++r) {
    const TraceRow& row = trace.rounds[r];
    const int t = r + 1;
    RoundCosts rc = sample_costs(stream, net, t);

    double round_cost = 0.0, comp_cost = 0.0, round_h = 0.0, lam_mean = 0.0;
    for (int i = 0; i < n; ++i) {
      round_cost += row.cost[i];
      round_h += row.imbalance[i];
      lam_mean += row.lambda[i];
      tele[i] += row.steps.gamma * row.imbalance[i];
      run_C_lam = std::max(run_C_lam, std::abs(row.lambda[i]));
      run_C_th = std::max(run_C_th, std::abs(row.theta[i]));
      run_C_lt = std::max(run_C_lt, std::abs(row.lambda_tilde[i]));
      if (net.is_generator(i)) {
        if (row.p[i] < 0.0 || row.p[i] > net.gen_cap[i]) ++rep.box_violations;
      } else if (row.p[i] != 0.0) {
        ++rep.box_violations;
      }
    }
    lam_mean /= nd;
    for (size_t g = 0; g < gens.size(); ++g)
      comp_cost += evaluate_cost(rc, gens[g], comparator.p_star[g]);
    cum_regret += round_cost - comp_cost;
    cum_h += round_h;
    if (round_h < -1e-12) premise = false;

    // Gradient-norm bounds with running empirical constants.
    if (row.max_grad_theta > 2.0 * run_C_lt * Binf + 1e-9)
      ++rep.grad_theta_bound_violations;
    if (row.max_grad_lambda > C_P + 2.0 * run_C_th * Binf + 1e-9)
      ++rep.grad_lambda_bound_violations;

    // Regret bound at this prefix, constants evaluated at the prefix.
    double C_th_bound = theta_mode == ThetaMode::fixed_pi ? pi : run_C_th;
    KValues k = bound_k_values(n, C_P, C_th_bound, run_C_lam, L_f, Binf, kappa, omega,
                       partial_omega_sum(omega, t));
    double rb = k.K1 + k.K2 * std::sqrt(static_cast<double>(t)) +
                k.K3 * std::log(static_cast<double>(t)) +
                k.K4 / std::sqrt(static_cast<double>(t));
    double rmargin = rb - cum_regret;
    if (t == 1 || rmargin < rep.regret_min_margin) {
      rep.regret_min_margin = rmargin;
      rep.regret_min_margin_t = t;
    }
    if (rmargin < 0.0) rep.regret_bound_ok = false;

    // Violation bound with the angle-box constant pi: |R_ec| <= N*pi*sqrt(t).
    double vmargin = nd * pi * std::sqrt(static_cast<double>(t)) -
                     std::abs(cum_h);
    if (t == 1 || vmargin < rep.violation_min_margin) {
      rep.violation_min_margin = vmargin;
      rep.violation_min_margin_t = t;
    }
    if (vmargin < 0.0) rep.violation_bound_ok = false;

    // Per-round descent inequality against the comparator at the mean dual.
    const std::vector<double>& p_next =
        r + 1 < T ? trace.rounds[r + 1].p : p_final;
    double lhs = evaluate_lagrangian(row.p, row.theta, lam_mean, rc, net, B) -
                 evaluate_lagrangian(p_star_bus, comparator.theta_star,
                                     lam_mean, rc, net, B);
    double sq_now = 0.0, sq_next = 0.0, mix_dev = 0.0;
    for (int i = 0; i < n; ++i) {
      double d0 = row.p[i] - p_star_bus[i];
      double d1 = p_next[i] - p_star_bus[i];
      sq_now += d0 * d0;
      sq_next += d1 * d1;
      mix_dev += std::abs(row.lambda_tilde[i] - lam_mean);
    }
    double rhs = (sq_now - sq_next) / (2.0 * row.steps.delta) +
                 0.5 * nd * row.steps.delta * (L_f + C_lam_global) *
                     (L_f + C_lam_global) +
                 2.0 * C_P * mix_dev;
    double dmargin = rhs - lhs;
    if (t == 1 || dmargin < rep.descent_min_margin) {
      rep.descent_min_margin = dmargin;
      rep.descent_min_margin_t = t;
    }
    if (dmargin < -1e-9) rep.descent_ok = false;
  }

  rep.telescoping_max_abs = 0.0;
  for (int i = 0; i < n; ++i)
    rep.telescoping_max_abs =
        std::max(rep.telescoping_max_abs,
                 std::abs(tele[i] - trace.final_state[i].theta));
  rep.telescoping_ok = rep.telescoping_max_abs <= 1e-9 * T;

  double theta_sum = 0.0;
  for (const AgentState& s : trace.final_state) theta_sum += s.theta;
  double gamma_T = trace.rounds.back().steps.gamma;
  rep.aggregate_imbalance = cum_h;
  rep.theta_sum_over_gamma = theta_sum / gamma_T;
  rep.imbalance_premise_holds = premise;
  rep.aggregate_bound_holds = cum_h <= rep.theta_sum_over_gamma + 1e-6;

  return rep;
}

std::vector<CurvePoint> average_curves(const RunTrace& trace,
                                       const DispatchSolution& comparator,
                                       const CostStreamConfig& stream,
                                       const Network& net) {
  std::vector<int> gens = net.generator_buses();
  if (comparator.p_star.size() != gens.size())
    throw std::invalid_argument("comparator size mismatch");
  std::vector<CurvePoint> out;
  out.reserve(trace.rounds.size());
  double cum_regret = 0.0, cum_h = 0.0;
  for (const TraceRow& row : trace.rounds) {
    RoundCosts rc = sample_costs(stream, net, row.t);
    double round_cost = 0.0, comp_cost = 0.0, round_h = 0.0;
    for (double c : row.cost) round_cost += c;
    for (double h : row.imbalance) round_h += h;
    for (size_t g = 0; g < gens.size(); ++g)
      comp_cost += evaluate_cost(rc, gens[g], comparator.p_star[g]);
    cum_regret += round_cost - comp_cost;
    cum_h += round_h;
    CurvePoint pt;
    pt.t = row.t;
    pt.avg_regret = cum_regret / row.t;
    pt.avg_violation = std::abs(cum_h) / row.t;
    pt.consensus_residual = consensus_residual(trace, row.t);
    out.push_back(pt);
  }
  return out;
}

}  // namespace dcopf
