// Benchmark: CSR/OpenMP round engine vs the dense serial reference.
// Reports wall time per engine and the worst per-field deviation, which
// must be exactly zero (both engines fix the same accumulation order).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "dcopf/reference.hpp"
#include "dcopf/sim.hpp"

using namespace dcopf;

namespace {

double max_abs_delta(const RunTrace& a, const RunTrace& b) {
  double worst = 0.0;
  auto upd = [&](const std::vector<double>& x, const std::vector<double>& y) {
    for (size_t i = 0; i < x.size(); ++i)
      worst = std::max(worst, std::abs(x[i] - y[i]));
  };
  for (size_t r = 0; r < a.rounds.size(); ++r) {
    upd(a.rounds[r].p, b.rounds[r].p);
    upd(a.rounds[r].theta, b.rounds[r].theta);
    upd(a.rounds[r].lambda, b.rounds[r].lambda);
    upd(a.rounds[r].lambda_tilde, b.rounds[r].lambda_tilde);
    upd(a.rounds[r].imbalance, b.rounds[r].imbalance);
  }
  for (size_t i = 0; i < a.final_state.size(); ++i) {
    worst = std::max(worst, std::abs(a.final_state[i].p_g - b.final_state[i].p_g));
    worst = std::max(worst, std::abs(a.final_state[i].theta - b.final_state[i].theta));
    worst = std::max(worst, std::abs(a.final_state[i].lambda - b.final_state[i].lambda));
  }
  return worst;
}

// Ring of n buses with chords every `hop` buses: connected, degree-bounded,
// and scales to sizes where the parallel sweep is worth measuring. Reactances
// are sized so the angle recursion stays stable at unit initial steps.
Network ring_with_chords(int n, int hop) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> react(20.0, 40.0);
  std::uniform_real_distribution<double> capd(0.5, 2.5);
  std::uniform_real_distribution<double> loadd(0.1, 0.5);
  Network net;
  net.n_buses = n;
  net.slack_bus = 0;
  net.gen_cap.assign(n, 0.0);
  net.load.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    net.lines.push_back({i, (i + 1) % n, react(rng)});
  for (int i = 0; i + hop < n; i += hop)
    net.lines.push_back({i, i + hop, react(rng)});
  double cap = 0.0, load = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i % 3 == 0) {
      net.gen_cap[i] = capd(rng);
      cap += net.gen_cap[i];
    } else {
      net.load[i] = loadd(rng);
      load += net.load[i];
    }
  }
  // scale loads under the installed capacity so the case validates
  if (load >= cap)
    for (double& l : net.load) l *= 0.8 * cap / load;
  return net;
}

void bench_case(const std::string& name, const Network& net, int horizon) {
  CostStreamConfig stream;
  stream.seed = 42;
  stream.horizon = horizon;
  StepSchedule sched;
  SystemModel model(net);

  auto t0 = std::chrono::steady_clock::now();
  RunTrace engine = simulate_rounds(model, sched, stream,
                                    GradVariant::consensus_duals, horizon);
  auto t1 = std::chrono::steady_clock::now();
  RunTrace ref = reference_simulate(net, sched, stream,
                                    GradVariant::consensus_duals, horizon);
  auto t2 = std::chrono::steady_clock::now();

  double te = std::chrono::duration<double>(t1 - t0).count();
  double tr = std::chrono::duration<double>(t2 - t1).count();
  double delta = max_abs_delta(engine, ref);
  std::printf("%-24s n=%-5d T=%-5d engine %8.4f s   reference %8.4f s   "
              "speedup %5.2fx   max|delta| %g\n",
              name.c_str(), net.n_buses, horizon, te, tr, tr / te, delta);
}

}  // namespace

int main(int argc, char** argv) {
  std::string case_path = argc > 1 ? argv[1] : "data/ieee14.json";
  int horizon = argc > 2 ? std::atoi(argv[2]) : 2000;

  bench_case("shipped 14-bus case", load_case(case_path), horizon);
  bench_case("ring-with-chords 120", ring_with_chords(120, 7), 500);
  bench_case("ring-with-chords 600", ring_with_chords(600, 11), 200);
  return 0;
}
