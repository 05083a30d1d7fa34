#pragma once

#include <span>
#include <string>
#include <vector>

namespace dcopf {

// Transmission line between two buses, susceptance b = 1/reactance.
struct Line {
  int from = 0;
  int to = 0;
  double reactance_pu = 0.0;
};

// Power network in per-unit quantities. Bus indices are 0-based internally;
// gen_cap[i] > 0 marks a generator bus, load[i] >= 0 is the fixed demand.
struct Network {
  int n_buses = 0;
  int slack_bus = 0;
  double base_mva = 100.0;
  std::vector<Line> lines;
  std::vector<double> gen_cap;  // per-unit, 0 for non-generator buses
  std::vector<double> load;     // per-unit
  std::vector<long long> bus_ids;  // external labels for reporting; empty ok

  bool is_generator(int bus) const { return gen_cap[bus] > 0.0; }
  long long bus_id(int bus) const {
    return bus_ids.empty() ? bus : bus_ids[bus];
  }
  std::vector<int> generator_buses() const;
  double total_capacity() const;
  double total_load() const;
};

// Dense symmetric susceptance matrix: entry (i,j) = 1/x_ij on lines, else 0.
struct SusceptanceMatrix {
  int n = 0;
  std::vector<double> entries;  // row-major n*n

  double at(int i, int j) const { return entries[static_cast<size_t>(i) * n + j]; }
  double& at(int i, int j) { return entries[static_cast<size_t>(i) * n + j]; }
  double row_sum(int i) const;
};

// Doubly stochastic communication weights; eta is the smallest nonzero entry.
struct WeightMatrix {
  int n = 0;
  std::vector<double> entries;  // row-major n*n
  double eta = 0.0;

  double at(int i, int j) const { return entries[static_cast<size_t>(i) * n + j]; }
  double& at(int i, int j) { return entries[static_cast<size_t>(i) * n + j]; }
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> errors;
  double total_capacity_pu = 0.0;
  double total_load_pu = 0.0;
};

SusceptanceMatrix build_susceptance_matrix(const Network& net);

// Metropolis-Hastings weights: W_ij = 1/(1+max(deg_i,deg_j)) on edges, the
// diagonal absorbs the residual. self_loop_floor in [0,1) blends toward the
// identity, W <- f*I + (1-f)*W, to force a larger diagonal if wanted.
WeightMatrix metropolis_weights(const Network& net, double self_loop_floor = 0.0);

ValidationReport validate_network(const Network& net);

double infinity_norm(const SusceptanceMatrix& m);

bool is_connected(const Network& net);

}  // namespace dcopf
