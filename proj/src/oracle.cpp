#include "dcopf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcopf {

AggregatedCosts aggregate_costs(const CostStreamConfig& stream,
                                const Network& net, int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  std::vector<int> gens = net.generator_buses();
  AggregatedCosts agg;
  agg.A.assign(gens.size(), 0.0);
  agg.Bc.assign(gens.size(), 0.0);
  agg.Cc.assign(gens.size(), 0.0);
  for (int t = 1; t <= horizon; ++t) {
    RoundCosts rc = sample_costs(stream, net, t);
    for (size_t g = 0; g < gens.size(); ++g) {
      agg.A[g] += rc.a[gens[g]];
      agg.Bc[g] += rc.b[gens[g]];
      agg.Cc[g] += rc.c[gens[g]];
    }
  }
  return agg;
}

double dispatch_cost(const AggregatedCosts& agg, std::span<const double> p) {
  if (p.size() != agg.A.size())
    throw std::invalid_argument("dispatch size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i)
    s += agg.A[i] * p[i] * p[i] + agg.Bc[i] * p[i] + agg.Cc[i];
  return s;
}

namespace {

double supply_at(double mu, const AggregatedCosts& agg,
                 std::span<const double> caps) {
  double s = 0.0;
  for (size_t i = 0; i < caps.size(); ++i) {
    double p = (mu - agg.Bc[i]) / (2.0 * agg.A[i]);
    s += std::clamp(p, 0.0, caps[i]);
  }
  return s;
}

}  // namespace

DispatchSolution economic_dispatch(const AggregatedCosts& agg,
                                   double total_load,
                                   std::span<const double> caps) {
  size_t m = caps.size();
  if (agg.A.size() != m || agg.Bc.size() != m)
    throw std::invalid_argument("aggregated costs / caps size mismatch");
  if (total_load < 0.0) throw std::runtime_error("negative total load");
  double cap_sum = 0.0;
  for (size_t i = 0; i < m; ++i) {
    if (!(agg.A[i] > 0.0))
      throw std::invalid_argument("aggregated quadratic coefficient must be > 0");
    if (!(caps[i] > 0.0))
      throw std::invalid_argument("generator capacity must be > 0");
    cap_sum += caps[i];
  }
  if (total_load > cap_sum)
    throw std::runtime_error("infeasible: total load exceeds total capacity");

  // Supply is monotone in mu; bracket covers every clamp breakpoint.
  double lo = agg.Bc[0], hi = 2.0 * agg.A[0] * caps[0] + agg.Bc[0];
  for (size_t i = 1; i < m; ++i) {
    lo = std::min(lo, agg.Bc[i]);
    hi = std::max(hi, 2.0 * agg.A[i] * caps[i] + agg.Bc[i]);
  }
  lo -= 1.0;
  hi += 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (supply_at(mid, agg, caps) < total_load)
      lo = mid;
    else
      hi = mid;
  }
  double mu = 0.5 * (lo + hi);

  DispatchSolution sol;
  sol.marginal_price = mu;
  sol.p_star.resize(m);
  for (size_t i = 0; i < m; ++i) {
    double p = (mu - agg.Bc[i]) / (2.0 * agg.A[i]);
    sol.p_star[i] = std::clamp(p, 0.0, caps[i]);
  }
  return sol;
}

std::vector<double> recover_angles(const SusceptanceMatrix& B,
                                   std::span<const double> injections,
                                   int slack) {
  const int n = B.n;
  if (static_cast<int>(injections.size()) != n)
    throw std::invalid_argument("injection vector size mismatch");
  if (slack < 0 || slack >= n)
    throw std::invalid_argument("slack index out of range");

  double total = 0.0, scale = 0.0;
  for (double x : injections) {
    total += x;
    scale = std::max(scale, std::abs(x));
  }
  if (std::abs(total) > 1e-9)
    throw std::invalid_argument("injections do not balance");

  if (n == 1) return {0.0};

  // Reduced Laplacian (slack row/column removed), dense with partial pivoting.
  const int m = n - 1;
  auto full = [&](int r) { return r < slack ? r : r + 1; };
  std::vector<double> M(static_cast<size_t>(m) * m, 0.0);
  std::vector<double> rhs(m, 0.0);
  for (int r = 0; r < m; ++r) {
    int i = full(r);
    double diag = 0.0;
    for (int j = 0; j < n; ++j) diag += B.at(i, j);
    for (int c = 0; c < m; ++c) {
      int j = full(c);
      M[static_cast<size_t>(r) * m + c] = (r == c) ? diag : -B.at(i, j);
    }
    rhs[r] = injections[i];
  }

  for (int k = 0; k < m; ++k) {
    int piv = k;
    double best = std::abs(M[static_cast<size_t>(k) * m + k]);
    for (int r = k + 1; r < m; ++r) {
      double v = std::abs(M[static_cast<size_t>(r) * m + k]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-12)
      throw std::runtime_error(
          "singular reduced system (graph disconnected?)");
    if (piv != k) {
      for (int c = k; c < m; ++c)
        std::swap(M[static_cast<size_t>(piv) * m + c],
                  M[static_cast<size_t>(k) * m + c]);
      std::swap(rhs[piv], rhs[k]);
    }
    for (int r = k + 1; r < m; ++r) {
      double f = M[static_cast<size_t>(r) * m + k] /
                 M[static_cast<size_t>(k) * m + k];
      if (f == 0.0) continue;
      M[static_cast<size_t>(r) * m + k] = 0.0;
      for (int c = k + 1; c < m; ++c)
        M[static_cast<size_t>(r) * m + c] -=
            f * M[static_cast<size_t>(k) * m + c];
      rhs[r] -= f * rhs[k];
    }
  }
  std::vector<double> x(m, 0.0);
  for (int r = m - 1; r >= 0; --r) {
    double acc = rhs[r];
    for (int c = r + 1; c < m; ++c)
      acc -= M[static_cast<size_t>(r) * m + c] * x[c];
    x[r] = acc / M[static_cast<size_t>(r) * m + r];
  }

  std::vector<double> theta(n, 0.0);
  for (int r = 0; r < m; ++r) theta[full(r)] = x[r];

  // Flow residual sanity; the solve is exact to rounding on any connected case.
  double resid = 0.0;
  for (int i = 0; i < n; ++i) {
    double flow = 0.0;
    for (int j = 0; j < n; ++j) flow += B.at(i, j) * (theta[i] - theta[j]);
    resid = std::max(resid, std::abs(injections[i] - flow));
  }
  if (resid > 1e-9 * std::max(1.0, scale))
    throw std::runtime_error("angle recovery residual too large");
  return theta;
}

std::vector<double> brute_force_dispatch(const AggregatedCosts& agg,
                                         double total_load,
                                         std::span<const double> caps,
                                         double grid_step) {
  size_t m = caps.size();
  if (agg.A.size() != m)
    throw std::invalid_argument("aggregated costs / caps size mismatch");
  if (m == 0 || m > 3)
    throw std::invalid_argument("brute force supports 1 to 3 generators");
  if (!(grid_step > 0.0)) throw std::invalid_argument("grid step must be > 0");
  if (total_load < 0.0) throw std::runtime_error("negative total load");

  // Grid over all but the last coordinate; the last one closes the balance.
  // Points are exact multiples of the step (no running sum) so the cap
  // endpoint appears exactly once and never as a one-ulp near miss.
  auto axis = [&](size_t i) {
    std::vector<double> pts;
    for (long k = 0; k * grid_step < caps[i]; ++k) pts.push_back(k * grid_step);
    pts.push_back(caps[i]);
    return pts;
  };
  const double slack_tol = 1e-12;

  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> best;
  std::vector<double> p(m, 0.0);
  auto consider = [&]() {
    double last = total_load;
    for (size_t i = 0; i + 1 < m; ++i) last -= p[i];
    if (last < -slack_tol || last > caps[m - 1] + slack_tol) return;
    p[m - 1] = std::clamp(last, 0.0, caps[m - 1]);
    double c = dispatch_cost(agg, p);
    if (c < best_cost) {
      best_cost = c;
      best = p;
    }
  };

  if (m == 1) {
    consider();
  } else if (m == 2) {
    for (double v : axis(0)) {
      p[0] = v;
      consider();
    }
  } else {
    for (double v0 : axis(0)) {
      p[0] = v0;
      for (double v1 : axis(1)) {
        p[1] = v1;
        consider();
      }
    }
  }
  if (best.empty())
    throw std::runtime_error("infeasible: no grid point balances the load");
  return best;
}

DispatchSolution hindsight_dispatch(const Network& net,
                                    const CostStreamConfig& stream,
                                    int horizon) {
  AggregatedCosts agg = aggregate_costs(stream, net, horizon);
  std::vector<int> gens = net.generator_buses();
  std::vector<double> caps(gens.size());
  for (size_t g = 0; g < gens.size(); ++g) caps[g] = net.gen_cap[gens[g]];

  DispatchSolution sol = economic_dispatch(agg, net.total_load(), caps);

  std::vector<double> injections(net.n_buses, 0.0);
  for (int i = 0; i < net.n_buses; ++i) injections[i] = -net.load[i];
  for (size_t g = 0; g < gens.size(); ++g) injections[gens[g]] += sol.p_star[g];

  // The bisection residual can leave a tiny aggregate mismatch; absorb it at
  // the slack so the angle solve sees exactly balanced injections.
  double total = 0.0;
  for (double x : injections) total += x;
  injections[net.slack_bus] -= total;

  SusceptanceMatrix B = build_susceptance_matrix(net);
  sol.theta_star = recover_angles(B, injections, net.slack_bus);
  return sol;
}

}  // namespace dcopf
