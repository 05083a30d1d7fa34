#include "dcopf/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>

namespace dcopf {

std::vector<int> Network::generator_buses() const {
  std::vector<int> out;
  for (int i = 0; i < n_buses; ++i)
    if (is_generator(i)) out.push_back(i);
  return out;
}

double Network::total_capacity() const {
  double s = 0.0;
  for (double c : gen_cap) s += c;
  return s;
}

double Network::total_load() const {
  double s = 0.0;
  for (double l : load) s += l;
  return s;
}

double SusceptanceMatrix::row_sum(int i) const {
  double s = 0.0;
  for (int j = 0; j < n; ++j) s += at(i, j);
  return s;
}

SusceptanceMatrix build_susceptance_matrix(const Network& net) {
  SusceptanceMatrix m;
  m.n = net.n_buses;
  m.entries.assign(static_cast<size_t>(m.n) * m.n, 0.0);
  for (const Line& l : net.lines) {
    if (!(l.reactance_pu > 0.0))
      throw std::runtime_error("invalid line: reactance must be positive");
    double b = 1.0 / l.reactance_pu;
    m.at(l.from, l.to) = b;
    m.at(l.to, l.from) = b;
  }
  return m;
}

bool is_connected(const Network& net) {
  if (net.n_buses <= 0) return false;
  std::vector<std::vector<int>> adj(net.n_buses);
  for (const Line& l : net.lines) {
    adj[l.from].push_back(l.to);
    adj[l.to].push_back(l.from);
  }
  std::vector<char> seen(net.n_buses, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        q.push(v);
      }
  }
  return count == net.n_buses;
}

WeightMatrix metropolis_weights(const Network& net, double self_loop_floor) {
  if (self_loop_floor < 0.0 || self_loop_floor >= 1.0)
    throw std::invalid_argument("self_loop_floor must lie in [0, 1)");
  if (!is_connected(net))
    throw std::runtime_error(
        "metropolis_weights requires a connected communication graph");

  int n = net.n_buses;
  std::vector<int> deg(n, 0);
  for (const Line& l : net.lines) {
    ++deg[l.from];
    ++deg[l.to];
  }

  WeightMatrix w;
  w.n = n;
  w.entries.assign(static_cast<size_t>(n) * n, 0.0);
  for (const Line& l : net.lines) {
    double v = 1.0 / (1.0 + std::max(deg[l.from], deg[l.to]));
    w.at(l.from, l.to) = v;
    w.at(l.to, l.from) = v;
  }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) off += w.at(i, j);
    w.at(i, i) = 1.0 - off;
  }

  // Optional blend toward the identity keeps rows stochastic and symmetric.
  if (self_loop_floor > 0.0) {
    double f = self_loop_floor;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        w.at(i, j) = (i == j ? f : 0.0) + (1.0 - f) * w.at(i, j);
  }

  double eta = 1.0;
  for (double v : w.entries)
    if (v > 0.0) eta = std::min(eta, v);
  w.eta = eta;
  return w;
}

ValidationReport validate_network(const Network& net) {
  ValidationReport rep;
  auto fail = [&rep](std::string msg) {
    rep.ok = false;
    rep.errors.push_back(std::move(msg));
  };

  if (net.n_buses <= 0) {
    fail("network has no buses");
    return rep;
  }
  if (static_cast<int>(net.gen_cap.size()) != net.n_buses ||
      static_cast<int>(net.load.size()) != net.n_buses) {
    fail("gen_cap/load arrays must have one entry per bus");
    return rep;
  }
  if (net.slack_bus < 0 || net.slack_bus >= net.n_buses)
    fail("slack bus index out of range");

  std::set<std::pair<int, int>> seen;
  bool lines_ok = true;
  for (const Line& l : net.lines) {
    if (l.from < 0 || l.from >= net.n_buses || l.to < 0 ||
        l.to >= net.n_buses) {
      fail("line endpoint out of range");
      lines_ok = false;
      continue;
    }
    if (l.from == l.to) {
      fail("line endpoints must be distinct");
      lines_ok = false;
    }
    if (!(l.reactance_pu > 0.0) || !std::isfinite(l.reactance_pu)) {
      fail("line reactance must be positive and finite");
      lines_ok = false;
    }
    auto key = std::minmax(l.from, l.to);
    if (!seen.insert(key).second) fail("duplicate undirected line");
  }

  for (int i = 0; i < net.n_buses; ++i) {
    if (net.gen_cap[i] < 0.0 || !std::isfinite(net.gen_cap[i]))
      fail("generator capacity must be nonnegative and finite");
    if (net.load[i] < 0.0 || !std::isfinite(net.load[i]))
      fail("load must be nonnegative and finite");
  }

  if (lines_ok && !is_connected(net)) fail("network graph is not connected");

  rep.total_capacity_pu = net.total_capacity();
  rep.total_load_pu = net.total_load();
  if (rep.total_capacity_pu < rep.total_load_pu)
    fail("total generation capacity below total load");

  return rep;
}

double infinity_norm(const SusceptanceMatrix& m) {
  double best = 0.0;
  for (int i = 0; i < m.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.n; ++j) s += std::abs(m.at(i, j));
    best = std::max(best, s);
  }
  return best;
}

}  // namespace dcopf
