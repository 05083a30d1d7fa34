#include "dcopf/reference.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dcopf {

// Deliberately naive: dense N x N matrices, plain loops, no shared engine
// code. Any disagreement with run_round beyond rounding noise is a bug in
// one of the two.
RunTrace reference_simulate(const Network& net, const StepSchedule& sched,
                            const CostStreamConfig& stream, GradVariant variant,
                            int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const int n = net.n_buses;

  // Own susceptance matrix.
  std::vector<double> B(static_cast<size_t>(n) * n, 0.0);
  for (const Line& l : net.lines) {
    if (!(l.reactance_pu > 0.0))
      throw std::runtime_error("invalid line: reactance must be positive");
    double b = 1.0 / l.reactance_pu;
    B[static_cast<size_t>(l.from) * n + l.to] = b;
    B[static_cast<size_t>(l.to) * n + l.from] = b;
  }
  std::vector<double> rowsum(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rowsum[i] += B[static_cast<size_t>(i) * n + j];

  // Own Metropolis weights.
  std::vector<int> deg(n, 0);
  for (const Line& l : net.lines) {
    ++deg[l.from];
    ++deg[l.to];
  }
  std::vector<double> W(static_cast<size_t>(n) * n, 0.0);
  for (const Line& l : net.lines) {
    double v = 1.0 / (1.0 + std::max(deg[l.from], deg[l.to]));
    W[static_cast<size_t>(l.from) * n + l.to] = v;
    W[static_cast<size_t>(l.to) * n + l.from] = v;
  }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) off += W[static_cast<size_t>(i) * n + j];
    W[static_cast<size_t>(i) * n + i] = 1.0 - off;
  }

  std::vector<double> p(n, 0.0), th(n, 0.0), lam(n, 0.0), lt(n, 0.0);
  std::vector<double> h(n), gth(n), pn(n), thn(n), lamn(n);

  RunTrace trace;
  trace.n_buses = n;
  trace.rounds.reserve(horizon);

  for (int t = 1; t <= horizon; ++t) {
    // Own step evaluation.
    double al = sched.alpha_scale * std::pow(t, -sched.alpha_exponent);
    double be = sched.beta_scale * std::pow(t, -sched.beta_exponent);
    double ga = sched.gamma_scale * std::pow(t, -sched.gamma_exponent);
    double de = sched.delta_scale * std::pow(t, -sched.delta_exponent);
    if (!(al > 0.0) || !(be > 0.0) || !(ga > 0.0) || !(de > 0.0))
      throw std::runtime_error("step schedule non-positive");

    RoundCosts rc = sample_costs(stream, net, t);

    // Dual mixing, then gradients, all from round-start values.
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        acc += W[static_cast<size_t>(i) * n + j] * lam[j];
      lt[i] = acc;
    }
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        acc += B[static_cast<size_t>(i) * n + j] * th[j];
      h[i] = p[i] - net.load[i] - th[i] * rowsum[i] + acc;
    }
    const std::vector<double>& duals =
        (variant == GradVariant::consensus_duals) ? lt : lam;
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        acc += B[static_cast<size_t>(i) * n + j] * duals[j];
      gth[i] = -duals[i] * rowsum[i] + acc;
    }

    TraceRow row;
    row.t = t;
    row.steps = {al, be, ga, de};
    row.p = p;
    row.theta = th;
    row.lambda = lam;
    row.lambda_tilde = lt;
    row.imbalance = h;
    row.cost.assign(n, 0.0);
    for (int i = 0; i < n; ++i)
      if (rc.has_cost[i]) row.cost[i] = rc.a[i] * p[i] * p[i] + rc.b[i] * p[i] + rc.c[i];
    for (int i = 0; i < n; ++i) {
      row.max_grad_theta = std::max(row.max_grad_theta, std::abs(gth[i]));
      row.max_grad_lambda = std::max(row.max_grad_lambda, std::abs(h[i]));
    }
    trace.rounds.push_back(std::move(row));

    // Simultaneous updates.
    for (int i = 0; i < n; ++i) {
      if (net.gen_cap[i] > 0.0) {
        double gp = 2.0 * rc.a[i] * p[i] + rc.b[i] + lt[i];
        double cand = p[i] - de * gp;
        if (cand < 0.0) cand = 0.0;
        if (cand > net.gen_cap[i]) cand = net.gen_cap[i];
        pn[i] = cand;
      } else {
        pn[i] = 0.0;
      }
      thn[i] = th[i] + ga * h[i];
      lamn[i] = lt[i] - be * gth[i] + al * h[i];
    }
    p.swap(pn);
    th.swap(thn);
    lam.swap(lamn);
  }

  trace.final_state.resize(n);
  for (int i = 0; i < n; ++i)
    trace.final_state[i] = {p[i], th[i], lam[i], lt[i]};
  return trace;
}

}  // namespace dcopf
