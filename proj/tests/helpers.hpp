#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "dcopf/network.hpp"
#include "dcopf/sim.hpp"

namespace dcopf::testutil {

// Small hand-built network; caps and loads are keyed by 0-based bus index.
inline Network make_network(int n, std::vector<Line> lines,
                            std::map<int, double> caps = {},
                            std::map<int, double> loads = {}, int slack = 0) {
  Network net;
  net.n_buses = n;
  net.slack_bus = slack;
  net.lines = std::move(lines);
  net.gen_cap.assign(n, 0.0);
  net.load.assign(n, 0.0);
  for (auto& [bus, cap] : caps) net.gen_cap[bus] = cap;
  for (auto& [bus, mw] : loads) net.load[bus] = mw;
  return net;
}

inline Network ieee14() {
  return load_case(std::string(DCOPF_DATA_DIR) + "/ieee14.json");
}

// Random connected topology: spanning tree plus a few extra edges.
inline Network random_connected(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> react(0.5, 5.0);
  std::vector<Line> lines;
  for (int i = 1; i < n; ++i) {
    int parent = static_cast<int>(rng() % static_cast<unsigned>(i));
    lines.push_back({parent, i, react(rng)});
  }
  int extras = n / 3;
  for (int e = 0; e < extras && n > 2; ++e) {
    int a = static_cast<int>(rng() % static_cast<unsigned>(n));
    int b = static_cast<int>(rng() % static_cast<unsigned>(n));
    if (a == b) continue;
    bool dup = false;
    for (const Line& l : lines)
      if ((l.from == a && l.to == b) || (l.from == b && l.to == a)) dup = true;
    if (!dup) lines.push_back({a, b, react(rng)});
  }
  return make_network(n, std::move(lines));
}

}  // namespace dcopf::testutil
