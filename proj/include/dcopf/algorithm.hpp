#pragma once

#include <span>
#include <vector>

#include "dcopf/costs.hpp"
#include "dcopf/network.hpp"
#include "dcopf/trace.hpp"

namespace dcopf {

// Which duals enter grad_theta: the consensus-mixed lambda-tilde (needs a
// second exchange per round, matches the analysis) or the raw neighbor
// lambda values (single exchange).
enum class GradVariant { consensus_duals, raw_duals };

// Step sizes scale * t^(-exponent); defaults alpha=gamma=delta=1/sqrt(t),
// beta=1/t.
struct StepSchedule {
  double alpha_scale = 1.0, alpha_exponent = 0.5;
  double beta_scale = 1.0, beta_exponent = 1.0;
  double gamma_scale = 1.0, gamma_exponent = 0.5;
  double delta_scale = 1.0, delta_exponent = 0.5;
};

StepSizes step_schedule_eval(const StepSchedule& sched, int t);

double project_box(double x, double lo, double hi);

// lambda_tilde_i = sum_j W_ij * lambda_j over the closed neighborhood;
// weights and lambdas are aligned spans (self entry included by the caller).
double consensus_step(std::span<const double> weights,
                      std::span<const double> lambdas);

// h_i = p_g - load - theta_i * sum(B_ij) + sum_j B_ij * theta_j, the local
// power-balance residual; also equals grad_lambda of the round Lagrangian.
double local_imbalance(const AgentState& state,
                       std::span<const double> susceptance_row,
                       std::span<const double> neighbor_thetas, double load);

double grad_p_lagrangian(const RoundCosts& costs, int bus, double p,
                         double lambda_tilde);

// -lambda_i * sum(B_ij) + sum_j B_ij * lambda_j; zero at dual consensus.
double grad_theta_lagrangian(double lambda_i,
                             std::span<const double> neighbor_lambdas,
                             std::span<const double> susceptance_row);

// Round Lagrangian at a common multiplier: sum_i f_{i,t}(p_i) + lambda * sum_i h_i.
double evaluate_lagrangian(std::span<const double> p,
                           std::span<const double> theta, double lambda,
                           const RoundCosts& costs, const Network& net,
                           const SusceptanceMatrix& B);

// Per-bus multiplier form: sum_i f_{i,t}(p_i) + sum_i lambda_i * h_i.
double evaluate_lagrangian(std::span<const double> p,
                           std::span<const double> theta,
                           std::span<const double> lambda,
                           const RoundCosts& costs, const Network& net,
                           const SusceptanceMatrix& B);

// Immutable per-run context: network, matrices, and CSR views of the line
// graph. Neighbor indices are sorted ascending (weight rows include the
// diagonal) so accumulation order is fixed and matches a dense row sweep.
struct SystemModel {
  Network net;
  SusceptanceMatrix B;
  WeightMatrix W;
  std::vector<int> nbr_offset;    // size n+1, open neighborhoods
  std::vector<int> nbr_index;     // neighbor bus ids, ascending per row
  std::vector<double> nbr_b;      // susceptance per neighbor
  std::vector<int> wrow_offset;   // size n+1, closed neighborhoods
  std::vector<int> wrow_index;    // ascending, includes the bus itself
  std::vector<double> wrow_value; // mixing weight per closed-row entry
  std::vector<double> b_row_sum;  // sum_j B_ij
  int max_degree = 0;

  explicit SystemModel(Network network, double self_loop_floor = 0.0);

  int degree(int bus) const { return nbr_offset[bus + 1] - nbr_offset[bus]; }
};

// One synchronized round over round-start states: phase 1 mixes duals, phase 2
// exchanges (lambda_tilde, theta), then every agent applies its primal and
// dual updates simultaneously. Returns the pre-update snapshot.
TraceRow run_round(const SystemModel& model, std::vector<AgentState>& states,
                   const RoundCosts& costs, const StepSchedule& sched, int t,
                   GradVariant variant = GradVariant::consensus_duals);

// Same round with an externally supplied mixing matrix (time-varying weights);
// W must carry the sparsity of the line graph.
TraceRow run_round(const SystemModel& model, std::vector<AgentState>& states,
                   const RoundCosts& costs, const WeightMatrix& W,
                   const StepSchedule& sched, int t,
                   GradVariant variant = GradVariant::consensus_duals);

}  // namespace dcopf
