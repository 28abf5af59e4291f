#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lsgc/error.hpp"
#include "lsgc/model.hpp"

namespace lsgc {

enum class PolicyKind : std::uint8_t {
  kAge,
  kGreedy,
  kCostBenefit,
  kMultiLog,
  kMultiLogOpt,
  kMdc,
  kMdcOpt,
};

enum class CostBenefitVariant : std::uint8_t {
  kLfsClassic,  // E * age / (2 - E)
  kTextForm,   // (1 - E) * age / E
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kMdc;
  CostBenefitVariant cost_benefit_variant = CostBenefitVariant::kLfsClassic;
  // Only consulted by the MDC family.
  bool separate_user_writes = true;
  bool separate_gc_writes = true;

  bool uses_oracle() const {
    return kind == PolicyKind::kMdcOpt || kind == PolicyKind::kMultiLogOpt;
  }
  bool is_multi_log() const {
    return kind == PolicyKind::kMultiLog || kind == PolicyKind::kMultiLogOpt;
  }
  bool is_mdc() const { return kind == PolicyKind::kMdc || kind == PolicyKind::kMdcOpt; }

  // Without GC separation there is no user separation either.
  PolicyConfig normalized() const {
    PolicyConfig out = *this;
    if (!out.separate_gc_writes) out.separate_user_writes = false;
    return out;
  }

  // Canonical name, including the MDC breakdown variants.
  std::string name() const {
    switch (kind) {
      case PolicyKind::kAge: return "age";
      case PolicyKind::kGreedy: return "greedy";
      case PolicyKind::kCostBenefit:
        return cost_benefit_variant == CostBenefitVariant::kLfsClassic
                   ? "cost_benefit"
                   : "cost_benefit_text";
      case PolicyKind::kMultiLog: return "multi_log";
      case PolicyKind::kMultiLogOpt: return "multi_log_opt";
      case PolicyKind::kMdc:
      case PolicyKind::kMdcOpt: {
        std::string base = kind == PolicyKind::kMdc ? "mdc" : "mdc_opt";
        const PolicyConfig n = normalized();
        if (!n.separate_gc_writes) return base + "_no_sep_user_gc";
        if (!n.separate_user_writes) return base + "_no_sep_user";
        return base;
      }
    }
    return "?";
  }

  bool operator==(const PolicyConfig&) const = default;
};

inline PolicyConfig parse_policy(std::string_view name) {
  PolicyConfig p;
  std::string n(name);
  std::replace(n.begin(), n.end(), '-', '_');
  auto strip = [&n](std::string_view suffix) {
    if (n.size() > suffix.size() && n.ends_with(suffix)) {
      n.resize(n.size() - suffix.size());
      return true;
    }
    return false;
  };
  if (strip("_no_sep_user_gc")) {
    p.separate_user_writes = false;
    p.separate_gc_writes = false;
    if (n != "mdc" && n != "mdc_opt")
      throw ConfigError("breakdown suffix only applies to mdc: " + std::string(name));
  } else if (strip("_no_sep_user")) {
    p.separate_user_writes = false;
    if (n != "mdc" && n != "mdc_opt")
      throw ConfigError("breakdown suffix only applies to mdc: " + std::string(name));
  }
  if (n == "age") p.kind = PolicyKind::kAge;
  else if (n == "greedy") p.kind = PolicyKind::kGreedy;
  else if (n == "cost_benefit") p.kind = PolicyKind::kCostBenefit;
  else if (n == "cost_benefit_text") {
    p.kind = PolicyKind::kCostBenefit;
    p.cost_benefit_variant = CostBenefitVariant::kTextForm;
  } else if (n == "multi_log") p.kind = PolicyKind::kMultiLog;
  else if (n == "multi_log_opt") p.kind = PolicyKind::kMultiLogOpt;
  else if (n == "mdc") p.kind = PolicyKind::kMdc;
  else if (n == "mdc_opt") p.kind = PolicyKind::kMdcOpt;
  else throw ConfigError("unknown policy: " + std::string(name));
  return p;
}

// Cleaning priority; lower values are cleaned first.
struct PriorityScore {
  double value = 0.0;

  auto operator<=>(const PriorityScore&) const = default;
};

inline constexpr double kNeverClean = std::numeric_limits<double>::infinity();

// Penultimate-update estimate after a non-first write at u_now: the prior
// last update is assumed to lie midway between old u_p2 and now, and it
// becomes the new penultimate update.
inline double update_u_p2(double old_u_p2, double u_now) {
  if (old_u_p2 > u_now)
    throw SimulationFault("clock fault: u_p2 " + std::to_string(old_u_p2) +
                          " is ahead of u_now " + std::to_string(u_now));
  return old_u_p2 + 0.5 * (u_now - old_u_p2);
}

// A page with no history takes the oldest u_p2 among the known values of
// the batch it arrives with; with none known it is treated as coldest (0).
inline double first_write_u_p2(std::span<const double> known_batch_u_p2) {
  if (known_batch_u_p2.empty()) return 0.0;
  return *std::min_element(known_batch_u_p2.begin(), known_batch_u_p2.end());
}

// Estimated declining cost: ((B - A) / A)^2 / (C * (u_now - u_p2)), with the
// interval floored at one tick.
inline PriorityScore priority_mdc(const SegmentMeta& m, double u_now,
                                  std::uint64_t segment_bytes) {
  if (m.live == 0) return {0.0};
  if (m.free_bytes == 0) return {kNeverClean};
  const double a = static_cast<double>(m.free_bytes);
  const double used = static_cast<double>(segment_bytes) - a;
  const double ratio = used / a;
  const double interval = std::max(u_now - m.u_p2, 1.0);
  return {ratio * ratio / (static_cast<double>(m.live) * interval)};
}

// Declining cost with the exact update rate of the live pages:
// (1 / E^2) * live_rate * delta_E, where delta_E = ((B - A) / C) / B.
inline PriorityScore priority_mdc_opt(const SegmentMeta& m, double live_rate,
                                      std::uint64_t segment_bytes) {
  if (m.live == 0) return {0.0};
  if (m.free_bytes == 0) return {kNeverClean};
  const double b = static_cast<double>(segment_bytes);
  const double e = static_cast<double>(m.free_bytes) / b;
  const double delta_e = ((b - static_cast<double>(m.free_bytes)) / m.live) / b;
  return {live_rate * delta_e / (e * e)};
}

inline PriorityScore priority_greedy(const SegmentMeta& m, std::uint64_t segment_bytes) {
  if (m.free_bytes == 0) return {kNeverClean};
  return {static_cast<double>(segment_bytes) / static_cast<double>(m.free_bytes)};
}

inline PriorityScore priority_age(const SegmentMeta& m) {
  return {static_cast<double>(m.sealed_at)};
}

inline double cost_benefit(double e, double age, CostBenefitVariant variant) {
  if (age <= 0.0) return 0.0;
  switch (variant) {
    case CostBenefitVariant::kLfsClassic:
      return e * age / (2.0 - e);
    case CostBenefitVariant::kTextForm:
      if (e <= 0.0) return std::numeric_limits<double>::infinity();
      return (1.0 - e) * age / e;
  }
  return 0.0;
}

// Largest benefit is cleaned first, so the score is the negated benefit.
// Age is measured from u_p1, the seal time.
inline PriorityScore priority_cost_benefit(const SegmentMeta& m, double u_now,
                                           std::uint64_t segment_bytes,
                                           CostBenefitVariant variant) {
  const double age = u_now - m.u_p1;
  return {-cost_benefit(m.emptiness(segment_bytes), age, variant)};
}

// Score under a policy's global victim ordering. Multi-log policies order
// by age when asked for a global ranking.
inline PriorityScore priority(const PolicyConfig& policy, const SegmentMeta& m,
                              double u_now, std::uint64_t segment_bytes) {
  switch (policy.kind) {
    case PolicyKind::kAge:
    case PolicyKind::kMultiLog:
    case PolicyKind::kMultiLogOpt:
      return priority_age(m);
    case PolicyKind::kGreedy:
      return priority_greedy(m, segment_bytes);
    case PolicyKind::kCostBenefit:
      return priority_cost_benefit(m, u_now, segment_bytes, policy.cost_benefit_variant);
    case PolicyKind::kMdc:
      return priority_mdc(m, u_now, segment_bytes);
    case PolicyKind::kMdcOpt:
      return priority_mdc_opt(m, m.live_rate, segment_bytes);
  }
  return {kNeverClean};
}

// The k sealed segments with the smallest score, ascending, ties broken by
// segment id. Returns every sealed segment when fewer than k exist.
template <typename ScoreFn>
std::vector<SegmentId> select_victims(std::span<const SegmentMeta> segments,
                                      std::size_t k, ScoreFn&& score) {
  std::vector<std::pair<PriorityScore, SegmentId>> ranked;
  ranked.reserve(segments.size());
  for (const SegmentMeta& m : segments)
    if (m.state == SegmentState::kSealed) ranked.emplace_back(score(m), m.id);
  k = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k),
                    ranked.end());
  std::vector<SegmentId> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(ranked[i].second);
  return out;
}

inline std::vector<SegmentId> select_victims(const PolicyConfig& policy,
                                             std::span<const SegmentMeta> segments,
                                             std::size_t k, double u_now,
                                             std::uint64_t segment_bytes) {
  if (policy.is_multi_log()) k = std::min<std::size_t>(k, 1);
  return select_victims(segments, k, [&](const SegmentMeta& m) {
    return priority(policy, m, u_now, segment_bytes);
  });
}

}  // namespace lsgc
