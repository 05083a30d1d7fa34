#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dcopf/network.hpp"

namespace dcopf {

// Quadratic generation costs a*p^2 + b*p + c for one round, indexed by bus.
// Entries are meaningful only where has_cost[bus] != 0 (generator buses).
struct RoundCosts {
  int t = 0;
  std::vector<double> a, b, c;
  std::vector<char> has_cost;
};

struct CostStreamConfig {
  std::array<double, 2> a_range{0.001, 0.08};  // 0 < lo <= hi
  std::array<double, 2> b_range{1.0, 5.0};
  double c_fixed = 0.0;
  std::uint64_t seed = 42;
  int horizon = 2000;
};

// Counter-based draw: hashing (seed, t, bus, dim) makes every coefficient a
// pure function of its coordinates, so streams replay exactly and in any
// order. dim 0 selects a, dim 1 selects b.
double uniform_from_key(std::uint64_t seed, std::uint64_t t, std::uint64_t bus,
                        std::uint64_t dim);

RoundCosts sample_costs(const CostStreamConfig& cfg, const Network& net, int t);

double evaluate_cost(const RoundCosts& costs, int bus, double p);

double cost_gradient(const RoundCosts& costs, int bus, double p);

}  // namespace dcopf
