#include "dcopf/costs.hpp"

#include <cmath>
#include <stdexcept>

namespace dcopf {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

double uniform_from_key(std::uint64_t seed, std::uint64_t t, std::uint64_t bus,
                        std::uint64_t dim) {
  std::uint64_t h = seed;
  h = splitmix64(h ^ (t * 0xD1B54A32D192ED03ULL));
  h = splitmix64(h ^ (bus * 0x8CB92BA72F3D8DD7ULL));
  h = splitmix64(h ^ dim);
  return static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
}

RoundCosts sample_costs(const CostStreamConfig& cfg, const Network& net,
                        int t) {
  if (!(cfg.a_range[0] > 0.0) || cfg.a_range[0] > cfg.a_range[1])
    throw std::invalid_argument("a_range must satisfy 0 < lo <= hi");
  if (cfg.b_range[0] > cfg.b_range[1])
    throw std::invalid_argument("b_range must satisfy lo <= hi");
  if (t < 1 || t > cfg.horizon)
    throw std::out_of_range("round index outside the configured horizon");

  RoundCosts rc;
  rc.t = t;
  rc.a.assign(net.n_buses, 0.0);
  rc.b.assign(net.n_buses, 0.0);
  rc.c.assign(net.n_buses, 0.0);
  rc.has_cost.assign(net.n_buses, 0);
  for (int i = 0; i < net.n_buses; ++i) {
    if (!net.is_generator(i)) continue;
    std::uint64_t bt = static_cast<std::uint64_t>(t);
    std::uint64_t bi = static_cast<std::uint64_t>(i);
    rc.a[i] = cfg.a_range[0] +
              uniform_from_key(cfg.seed, bt, bi, 0) *
                  (cfg.a_range[1] - cfg.a_range[0]);
    rc.b[i] = cfg.b_range[0] +
              uniform_from_key(cfg.seed, bt, bi, 1) *
                  (cfg.b_range[1] - cfg.b_range[0]);
    rc.c[i] = cfg.c_fixed;
    rc.has_cost[i] = 1;
  }
  return rc;
}

static void check_cost_bus(const RoundCosts& costs, int bus) {
  if (bus < 0 || bus >= static_cast<int>(costs.has_cost.size()))
    throw std::invalid_argument("bus index out of range");
  if (!costs.has_cost[bus])
    throw std::invalid_argument("bus has no generation cost");
}

double evaluate_cost(const RoundCosts& costs, int bus, double p) {
  check_cost_bus(costs, bus);
  return costs.a[bus] * p * p + costs.b[bus] * p + costs.c[bus];
}

double cost_gradient(const RoundCosts& costs, int bus, double p) {
  check_cost_bus(costs, bus);
  return 2.0 * costs.a[bus] * p + costs.b[bus];
}

}  // namespace dcopf
