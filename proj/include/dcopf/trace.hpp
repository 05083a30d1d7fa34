#pragma once

#include <vector>

namespace dcopf {

// Per-bus iterate: generation, voltage angle, price dual and its mixed value.
struct AgentState {
  double p_g = 0.0;
  double theta = 0.0;
  double lambda = 0.0;
  double lambda_tilde = 0.0;
};

struct StepSizes {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
};

// Snapshot of one round: pre-update iterates, the mixed duals computed that
// round, realized per-bus cost f_{i,t}(p_{i,t}) and imbalance h_{i,t}.
// max_grad_* carry the round's largest |grad_theta L| and |grad_lambda L|
// for the gradient-norm diagnostics.
struct TraceRow {
  int t = 0;
  StepSizes steps;
  std::vector<double> p, theta, lambda, lambda_tilde, cost, imbalance;
  double max_grad_theta = 0.0;
  double max_grad_lambda = 0.0;
};

// Whole-run log; final_state holds the post-round-T iterates (p_{T+1},
// theta_{T+1}, lambda_{T+1}), which the telescoping identity needs.
struct RunTrace {
  int n_buses = 0;
  std::vector<TraceRow> rounds;
  std::vector<AgentState> final_state;

  int horizon() const { return static_cast<int>(rounds.size()); }
};

}  // namespace dcopf
