#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsgc/error.hpp"

namespace lsgc {

inline constexpr double kFixpointTolerance = 1e-10;

// Emptiness at clean time for age-order cleaning under uniform updates:
// the nonzero fixpoint of E = 1 - exp(-E / F), or of the finite form
// E = 1 - ((P - 1) / P)^(P E / F) when a page count is given.
inline double solve_emptiness(double fill, std::optional<std::uint64_t> pages = std::nullopt) {
  if (!(fill > 0.0)) throw ConfigError("fill factor must be positive");
  if (!(fill < 1.0)) throw ConfigError("fill factor must be below 1: no positive fixpoint");
  if (pages && *pages < 2) throw ConfigError("page count must be at least 2");
  const double log_keep =
      pages ? std::log1p(-1.0 / static_cast<double>(*pages)) : -1.0;
  const double scale = pages ? static_cast<double>(*pages) : 1.0;
  auto f = [&](double e) { return -std::expm1(scale * e / fill * log_keep); };
  // f is concave with slope below one past the root, so the distance to the
  // root is bounded by the residual over (1 - slope).
  const double rate = scale * -log_keep / fill;
  double e = 1.0;
  for (int i = 0; i < 50'000'000; ++i) {
    const double fe = f(e);
    const double slope = (1.0 - fe) * rate;
    if (slope < 1.0 && std::abs(fe - e) < kFixpointTolerance * (1.0 - slope)) return e;
    e = 0.5 * e + 0.5 * fe;
  }
  return e;
}

// One row of the uniform-update table: emptiness at clean, I/O cost per
// segment written (2 / E), R = E / (1 - F) and write amplification.
struct AnalyticPoint {
  double fill = 0.0;
  double emptiness = 0.0;
  double cost = 0.0;
  double r = 0.0;
  double wamp = 0.0;
};

inline AnalyticPoint analytic_point(double fill) {
  AnalyticPoint p;
  p.fill = fill;
  p.emptiness = solve_emptiness(fill);
  p.cost = 2.0 / p.emptiness;
  p.r = p.emptiness / (1.0 - fill);
  p.wamp = (1.0 - p.emptiness) / p.emptiness;
  return p;
}

inline const std::vector<double>& default_table1_fills() {
  static const std::vector<double> kFills = {0.975, 0.95, 0.90, 0.85, 0.80, 0.75,
                                             0.70,  0.65, 0.60, 0.55, 0.50, 0.45,
                                             0.40,  0.35, 0.30, 0.25, 0.20};
  return kFills;
}

inline std::vector<AnalyticPoint> table1(std::span<const double> fills) {
  std::vector<AnalyticPoint> out;
  out.reserve(fills.size());
  for (double f : fills) out.push_back(analytic_point(f));
  return out;
}

// Two page sets managed in separate spaces. dist is each set's share of the
// data, update its share of updates and slack its share of free space.
struct SkewSpec {
  double fill = 0.8;
  std::array<double, 2> dist{0.5, 0.5};
  std::array<double, 2> update{0.5, 0.5};
  std::array<double, 2> slack{0.5, 0.5};

  void validate() const {
    if (!(fill > 0.0 && fill < 1.0)) throw ConfigError("fill factor must lie in (0, 1)");
    for (int i = 0; i < 2; ++i) {
      if (!(dist[i] > 0.0 && dist[i] < 1.0)) throw ConfigError("dist must lie in (0, 1)");
      if (!(update[i] > 0.0 && update[i] < 1.0))
        throw ConfigError("update share must lie in (0, 1)");
      if (!(slack[i] >= 0.0 && slack[i] <= 1.0))
        throw ConfigError("slack share must lie in [0, 1]");
    }
    if (std::abs(dist[0] + dist[1] - 1.0) > 1e-9) throw ConfigError("dist must sum to 1");
    if (std::abs(update[0] + update[1] - 1.0) > 1e-9)
      throw ConfigError("update shares must sum to 1");
    if (std::abs(slack[0] + slack[1] - 1.0) > 1e-9)
      throw ConfigError("slack shares must sum to 1");
  }

  // Fill factor of set i within its own space.
  double set_fill(int i) const {
    const double data = fill * dist[i];
    return data / ((1.0 - fill) * slack[i] + data);
  }
};

// Hot/cold m:(1-m) split: set 0 is hot (m of updates on 1 - m of data).
inline SkewSpec hot_cold_split(double fill, double m, double hot_slack) {
  SkewSpec s;
  s.fill = fill;
  s.dist = {1.0 - m, m};
  s.update = {m, 1.0 - m};
  s.slack = {hot_slack, 1.0 - hot_slack};
  return s;
}

// Update-weighted cost of cleaning each set in its own space with exact
// fixpoint emptiness per set.
inline double split_cost(const SkewSpec& spec) {
  spec.validate();
  double total = 0.0;
  for (int i = 0; i < 2; ++i) {
    if (spec.slack[i] <= 0.0) return std::numeric_limits<double>::infinity();
    total += spec.update[i] * 2.0 / solve_emptiness(spec.set_fill(i));
  }
  return total;
}

struct SplitOptimum {
  double g1 = 0.0;
  double cost = 0.0;
  // g1 from the stationarity condition with R_i held at their values at
  // the optimum: g1 / g2 = sqrt((U1 Dist1 / R1) / (U2 Dist2 / R2)), which is
  // sqrt(R2 / R1) when U1 Dist1 = U2 Dist2.
  double closed_form_g1 = 0.0;
};

inline double closed_form_g1(const SkewSpec& at) {
  double weight[2];
  for (int i = 0; i < 2; ++i) {
    const double fi = at.set_fill(i);
    const double r = solve_emptiness(fi) / (1.0 - fi);
    weight[i] = at.update[i] * at.dist[i] / r;
  }
  const double ratio = std::sqrt(weight[0] / weight[1]);
  return ratio / (1.0 + ratio);
}

// Golden-section search of split_cost over g1 in (0.01, 0.99).
inline SplitOptimum optimize_split(double fill, std::array<double, 2> dist,
                                   std::array<double, 2> update, double tolerance = 1e-8) {
  SkewSpec spec;
  spec.fill = fill;
  spec.dist = dist;
  spec.update = update;
  auto cost_at = [&](double g) {
    spec.slack = {g, 1.0 - g};
    return split_cost(spec);
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.01;
  double hi = 0.99;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = cost_at(x1);
  double f2 = cost_at(x2);
  while (hi - lo > tolerance) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = cost_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = cost_at(x2);
    }
  }
  SplitOptimum out;
  out.g1 = 0.5 * (lo + hi);
  out.cost = cost_at(out.g1);
  spec.slack = {out.g1, 1.0 - out.g1};
  out.closed_form_g1 = closed_form_g1(spec);
  return out;
}

// Sum of x_i * y_i with both sequences sorted the same way, the maximum
// over all pairings.
inline double max_pairing_sum(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("pairing needs sequences of equal length");
  for (double v : x)
    if (!(v > 0.0)) throw ConfigError("pairing entries must be positive");
  for (double v : y)
    if (!(v > 0.0)) throw ConfigError("pairing entries must be positive");
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) sum += xs[i] * ys[i];
  return sum;
}

}  // namespace lsgc
