#pragma once

#include <span>
#include <vector>

#include "dcopf/costs.hpp"
#include "dcopf/network.hpp"

namespace dcopf {

// Horizon-summed quadratic coefficients per generator (A = sum_t a_t > 0),
// ordered like Network::generator_buses().
struct AggregatedCosts {
  std::vector<double> A, Bc, Cc;
};

// Best fixed dispatch in hindsight: per-generator p_star, per-bus angles with
// theta[slack] = 0, and the single marginal price of the balance constraint.
struct DispatchSolution {
  std::vector<double> p_star;
  std::vector<double> theta_star;
  double marginal_price = 0.0;
};

AggregatedCosts aggregate_costs(const CostStreamConfig& stream,
                                const Network& net, int horizon);

// Single-balance economic dispatch of total_load across capacity boxes:
// bisection on the marginal price mu with p_i(mu) = clamp((mu-Bc_i)/(2A_i),
// 0, cap_i) until supply matches load to 1e-10. theta_star is left empty.
DispatchSolution economic_dispatch(const AggregatedCosts& agg,
                                   double total_load,
                                   std::span<const double> caps);

// Angles reproducing the given balanced injections under the DC flow
// equations: solves the reduced Laplacian system (slack row/column removed)
// by dense Gaussian elimination with partial pivoting, theta[slack] = 0.
std::vector<double> recover_angles(const SusceptanceMatrix& B,
                                   std::span<const double> injections,
                                   int slack);

// Exhaustive grid search over feasible dispatches with sum p = total_load
// (last coordinate eliminated); independent oracle, at most 3 generators.
std::vector<double> brute_force_dispatch(const AggregatedCosts& agg,
                                         double total_load,
                                         std::span<const double> caps,
                                         double grid_step);

// Full comparator for a run: aggregate the stream, dispatch the total load,
// then recover angles from the resulting injections.
DispatchSolution hindsight_dispatch(const Network& net,
                                    const CostStreamConfig& stream,
                                    int horizon);

// Cost of a fixed per-generator dispatch under aggregated coefficients.
double dispatch_cost(const AggregatedCosts& agg, std::span<const double> p);

}  // namespace dcopf
