#include "dcopf/algorithm.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dcopf {

StepSizes step_schedule_eval(const StepSchedule& sched, int t) {
  if (t < 1) throw std::invalid_argument("round index must be >= 1");
  StepSizes s;
  s.alpha = sched.alpha_scale * std::pow(t, -sched.alpha_exponent);
  s.beta = sched.beta_scale * std::pow(t, -sched.beta_exponent);
  s.gamma = sched.gamma_scale * std::pow(t, -sched.gamma_exponent);
  s.delta = sched.delta_scale * std::pow(t, -sched.delta_exponent);
  auto ok = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!ok(s.alpha) || !ok(s.beta) || !ok(s.gamma) || !ok(s.delta))
    throw std::runtime_error("step schedule non-positive at this round");
  return s;
}

double project_box(double x, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("empty projection box");
  return std::min(hi, std::max(lo, x));
}

double consensus_step(std::span<const double> weights,
                      std::span<const double> lambdas) {
  if (weights.size() != lambdas.size())
    throw std::invalid_argument("weights/lambdas size mismatch");
  double acc = 0.0;
  for (size_t k = 0; k < weights.size(); ++k) acc += weights[k] * lambdas[k];
  return acc;
}

double local_imbalance(const AgentState& state,
                       std::span<const double> susceptance_row,
                       std::span<const double> neighbor_thetas, double load) {
  if (susceptance_row.size() != neighbor_thetas.size())
    throw std::invalid_argument("susceptance/theta size mismatch");
  double acc = 0.0, bsum = 0.0;
  for (size_t k = 0; k < susceptance_row.size(); ++k) {
    acc += susceptance_row[k] * neighbor_thetas[k];
    bsum += susceptance_row[k];
  }
  return state.p_g - load - state.theta * bsum + acc;
}

double grad_p_lagrangian(const RoundCosts& costs, int bus, double p,
                         double lambda_tilde) {
  return cost_gradient(costs, bus, p) + lambda_tilde;
}

double grad_theta_lagrangian(double lambda_i,
                             std::span<const double> neighbor_lambdas,
                             std::span<const double> susceptance_row) {
  if (susceptance_row.size() != neighbor_lambdas.size())
    throw std::invalid_argument("susceptance/lambda size mismatch");
  double acc = 0.0, bsum = 0.0;
  for (size_t k = 0; k < susceptance_row.size(); ++k) {
    acc += susceptance_row[k] * neighbor_lambdas[k];
    bsum += susceptance_row[k];
  }
  return -lambda_i * bsum + acc;
}

namespace {

double lagrangian_imbalances(std::span<const double> p,
                             std::span<const double> theta, const Network& net,
                             const SusceptanceMatrix& B,
                             std::span<double> h_out) {
  const int n = net.n_buses;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0, bsum = 0.0;
    for (int j = 0; j < n; ++j) {
      acc += B.at(i, j) * theta[j];
      bsum += B.at(i, j);
    }
    h_out[i] = p[i] - net.load[i] - theta[i] * bsum + acc;
    total += h_out[i];
  }
  return total;
}

double cost_total(std::span<const double> p, const RoundCosts& costs) {
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i)
    if (costs.has_cost[i]) s += evaluate_cost(costs, static_cast<int>(i), p[i]);
  return s;
}

}  // namespace

double evaluate_lagrangian(std::span<const double> p,
                           std::span<const double> theta, double lambda,
                           const RoundCosts& costs, const Network& net,
                           const SusceptanceMatrix& B) {
  if (static_cast<int>(p.size()) != net.n_buses ||
      static_cast<int>(theta.size()) != net.n_buses)
    throw std::invalid_argument("state size mismatch");
  std::vector<double> h(net.n_buses);
  double total_h = lagrangian_imbalances(p, theta, net, B, h);
  return cost_total(p, costs) + lambda * total_h;
}

double evaluate_lagrangian(std::span<const double> p,
                           std::span<const double> theta,
                           std::span<const double> lambda,
                           const RoundCosts& costs, const Network& net,
                           const SusceptanceMatrix& B) {
  if (static_cast<int>(p.size()) != net.n_buses ||
      static_cast<int>(theta.size()) != net.n_buses ||
      static_cast<int>(lambda.size()) != net.n_buses)
    throw std::invalid_argument("state size mismatch");
  std::vector<double> h(net.n_buses);
  lagrangian_imbalances(p, theta, net, B, h);
  double s = cost_total(p, costs);
  for (int i = 0; i < net.n_buses; ++i) s += lambda[i] * h[i];
  return s;
}

SystemModel::SystemModel(Network network, double self_loop_floor)
    : net(std::move(network)) {
  ValidationReport rep = validate_network(net);
  if (!rep.ok) {
    std::ostringstream os;
    os << "invalid network:";
    for (const auto& e : rep.errors) os << " " << e << ";";
    throw std::runtime_error(os.str());
  }
  B = build_susceptance_matrix(net);
  W = metropolis_weights(net, self_loop_floor);

  const int n = net.n_buses;
  nbr_offset.assign(n + 1, 0);
  wrow_offset.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    nbr_offset[i + 1] = nbr_offset[i];
    wrow_offset[i + 1] = wrow_offset[i];
    for (int j = 0; j < n; ++j) {
      if (B.at(i, j) != 0.0) {
        nbr_index.push_back(j);
        nbr_b.push_back(B.at(i, j));
        ++nbr_offset[i + 1];
      }
      if (j == i || W.at(i, j) != 0.0) {
        wrow_index.push_back(j);
        wrow_value.push_back(W.at(i, j));
        ++wrow_offset[i + 1];
      }
    }
  }
  b_row_sum.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int k = nbr_offset[i]; k < nbr_offset[i + 1]; ++k)
      b_row_sum[i] += nbr_b[k];
    max_degree = std::max(max_degree, degree(i));
  }
}

namespace {

// Core round body; w_of(i, k) returns the mixing weight for closed-row slot k
// of bus i, so the same code serves the precomputed and the per-round W.
template <class WVal>
TraceRow run_round_impl(const SystemModel& model,
                        std::vector<AgentState>& states,
                        const RoundCosts& costs, const StepSchedule& sched,
                        int t, GradVariant variant, WVal&& w_of) {
  const int n = model.net.n_buses;
  if (static_cast<int>(states.size()) != n)
    throw std::invalid_argument("state vector size mismatch");
  if (static_cast<int>(costs.has_cost.size()) != n)
    throw std::invalid_argument("cost vector size mismatch");
  const StepSizes st = step_schedule_eval(sched, t);

  std::vector<double> lam_tilde(n), h(n), gth(n);
  std::vector<double> p_next(n), th_next(n), lam_next(n);
  const int scratch_len = model.max_degree + 1;

  // Phase 1: every agent mixes its neighbors' duals.
#pragma omp parallel
  {
    std::vector<double> wbuf(scratch_len), vbuf(scratch_len);
#pragma omp for
    for (int i = 0; i < n; ++i) {
      int len = model.wrow_offset[i + 1] - model.wrow_offset[i];
      for (int k = 0; k < len; ++k) {
        int slot = model.wrow_offset[i] + k;
        wbuf[k] = w_of(i, slot);
        vbuf[k] = states[model.wrow_index[slot]].lambda;
      }
      lam_tilde[i] = consensus_step({wbuf.data(), static_cast<size_t>(len)},
                                    {vbuf.data(), static_cast<size_t>(len)});
    }
  }

  // Phase 2: exchange (lambda_tilde, theta), then simultaneous updates from
  // round-start values only.
#pragma omp parallel
  {
    std::vector<double> tbuf(scratch_len), dbuf(scratch_len);
#pragma omp for
    for (int i = 0; i < n; ++i) {
      int off = model.nbr_offset[i];
      int len = model.nbr_offset[i + 1] - off;
      for (int k = 0; k < len; ++k) {
        int j = model.nbr_index[off + k];
        tbuf[k] = states[j].theta;
        dbuf[k] = variant == GradVariant::consensus_duals
                      ? lam_tilde[j]
                      : states[j].lambda;
      }
      std::span<const double> b_row{model.nbr_b.data() + off,
                                    static_cast<size_t>(len)};
      h[i] = local_imbalance(states[i], b_row,
                             {tbuf.data(), static_cast<size_t>(len)},
                             model.net.load[i]);
      double dual_i = variant == GradVariant::consensus_duals
                          ? lam_tilde[i]
                          : states[i].lambda;
      gth[i] = grad_theta_lagrangian(
          dual_i, {dbuf.data(), static_cast<size_t>(len)}, b_row);

      if (model.net.is_generator(i)) {
        double gp = grad_p_lagrangian(costs, i, states[i].p_g, lam_tilde[i]);
        p_next[i] = project_box(states[i].p_g - st.delta * gp, 0.0,
                                model.net.gen_cap[i]);
      } else {
        p_next[i] = 0.0;
      }
      th_next[i] = states[i].theta + st.gamma * h[i];
      lam_next[i] = lam_tilde[i] - st.beta * gth[i] + st.alpha * h[i];
    }
  }

  TraceRow row;
  row.t = t;
  row.steps = st;
  row.p.resize(n);
  row.theta.resize(n);
  row.lambda.resize(n);
  row.cost.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    row.p[i] = states[i].p_g;
    row.theta[i] = states[i].theta;
    row.lambda[i] = states[i].lambda;
    if (costs.has_cost[i]) row.cost[i] = evaluate_cost(costs, i, states[i].p_g);
  }
  row.lambda_tilde = lam_tilde;
  row.imbalance = h;
  for (int i = 0; i < n; ++i) {
    row.max_grad_theta = std::max(row.max_grad_theta, std::abs(gth[i]));
    row.max_grad_lambda = std::max(row.max_grad_lambda, std::abs(h[i]));
  }

  for (int i = 0; i < n; ++i)
    states[i] = {p_next[i], th_next[i], lam_next[i], lam_tilde[i]};
  return row;
}

}  // namespace

TraceRow run_round(const SystemModel& model, std::vector<AgentState>& states,
                   const RoundCosts& costs, const StepSchedule& sched, int t,
                   GradVariant variant) {
  return run_round_impl(model, states, costs, sched, t, variant,
                        [&model](int, int slot) {
                          return model.wrow_value[slot];
                        });
}

TraceRow run_round(const SystemModel& model, std::vector<AgentState>& states,
                   const RoundCosts& costs, const WeightMatrix& W,
                   const StepSchedule& sched, int t, GradVariant variant) {
  if (W.n != model.net.n_buses)
    throw std::invalid_argument("weight matrix size mismatch");
  return run_round_impl(model, states, costs, sched, t, variant,
                        [&model, &W](int i, int slot) {
                          return W.at(i, model.wrow_index[slot]);
                        });
}

}  // namespace dcopf
