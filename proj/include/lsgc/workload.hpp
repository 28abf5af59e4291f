#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsgc/config.hpp"
#include "lsgc/error.hpp"
#include "lsgc/rng.hpp"

namespace lsgc {

enum class WorkloadKind : std::uint8_t { kUniform, kHotCold, kZipfian, kTrace };

inline std::string to_string(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::kUniform: return "uniform";
    case WorkloadKind::kHotCold: return "hotcold";
    case WorkloadKind::kZipfian: return "zipfian";
    case WorkloadKind::kTrace: return "trace";
  }
  return "?";
}

inline WorkloadKind parse_workload_kind(std::string_view s) {
  if (s == "uniform") return WorkloadKind::kUniform;
  if (s == "hotcold" || s == "hot_cold" || s == "hot-cold") return WorkloadKind::kHotCold;
  if (s == "zipfian" || s == "zipf") return WorkloadKind::kZipfian;
  if (s == "trace") return WorkloadKind::kTrace;
  throw ConfigError("unknown workload: " + std::string(s));
}

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::kUniform;
  // hotcold: fraction m of updates that go to the (1 - m) hot share of pages.
  double hot_update_fraction = 0.8;
  double zipf_theta = 0.99;
  std::string trace_path;
  std::uint64_t seed = 1;

  void validate() const {
    if (kind == WorkloadKind::kHotCold &&
        !(hot_update_fraction >= 0.5 && hot_update_fraction < 1.0))
      throw ConfigError("hot_update_fraction must lie in [0.5, 1)");
    if (kind == WorkloadKind::kZipfian && !(zipf_theta > 0.0))
      throw ConfigError("zipf_theta must be positive");
    if (kind == WorkloadKind::kTrace && trace_path.empty())
      throw ConfigError("trace workload needs trace_path");
  }

  // The skew parameter reported alongside results (m or theta).
  double skew_parameter() const {
    switch (kind) {
      case WorkloadKind::kHotCold: return hot_update_fraction;
      case WorkloadKind::kZipfian: return zipf_theta;
      default: return 0.0;
    }
  }
};

// Vose alias table: O(1) sampling from a fixed discrete distribution.
class AliasTable {
 public:
  AliasTable() = default;

  explicit AliasTable(const std::vector<double>& weights) {
    const std::size_t n = weights.size();
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      small.pop_back();
      const std::uint32_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::uint32_t i : large) prob_[i] = 1.0;
    for (std::uint32_t i : small) prob_[i] = 1.0;
  }

  std::uint32_t sample(Rng& rng) const {
    const auto i = static_cast<std::uint32_t>(rng.below(prob_.size()));
    return rng.unit() < prob_[i] ? i : alias_[i];
  }

  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

// Parses the trace format: one ASCII decimal page id per LF-terminated
// line, '#' comment lines, no header. Ids must be below `pages`.
inline std::vector<PageId> parse_trace(std::istream& in, std::uint32_t pages) {
  std::vector<PageId> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.front() == '#') continue;
    std::uint64_t id = 0;
    const char* first = line.data();
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, id);
    if (line.empty() || ec != std::errc() || ptr != last)
      throw ParseError("malformed trace entry '" + line + "'", line_no);
    if (id >= pages)
      throw ParseError("page id " + std::to_string(id) + " outside [0, " +
                           std::to_string(pages) + ")",
                       line_no);
    out.push_back(static_cast<PageId>(id));
  }
  return out;
}

inline std::vector<PageId> read_trace(const std::string& path, std::uint32_t pages) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open trace file: " + path);
  return parse_trace(in, pages);
}

// Page-write stream for one run. Synthetic kinds scramble frequency rank
// onto page ids with a seeded permutation so that hot pages are not
// spatially clustered.
class WorkloadGenerator {
 public:
  WorkloadGenerator(const WorkloadSpec& spec, std::uint32_t pages)
      : spec_(spec), pages_(pages), rng_(spec.seed) {
    spec.validate();
    if (pages == 0) throw ConfigError("workload needs at least one page");
    switch (spec.kind) {
      case WorkloadKind::kUniform:
        break;
      case WorkloadKind::kHotCold: {
        if (pages < 2) throw ConfigError("hotcold needs at least two pages");
        const double hot = std::round((1.0 - spec.hot_update_fraction) * pages);
        hot_count_ = static_cast<std::uint32_t>(
            std::clamp(hot, 1.0, static_cast<double>(pages - 1)));
        permutation_ = random_permutation(pages, rng_);
        break;
      }
      case WorkloadKind::kZipfian: {
        permutation_ = random_permutation(pages, rng_);
        alias_ = AliasTable(zipf_weights(pages, spec.zipf_theta));
        break;
      }
      case WorkloadKind::kTrace:
        trace_ = read_trace(spec.trace_path, pages);
        break;
    }
  }

  // Builds a trace-kind generator from already parsed ids.
  static WorkloadGenerator from_trace(std::vector<PageId> ids, std::uint32_t pages) {
    WorkloadSpec spec;
    spec.kind = WorkloadKind::kUniform;
    WorkloadGenerator g(spec, pages);
    g.spec_.kind = WorkloadKind::kTrace;
    for (PageId id : ids)
      if (id >= pages) throw ConfigError("trace page id out of range");
    g.trace_ = std::move(ids);
    return g;
  }

  const WorkloadSpec& spec() const { return spec_; }
  std::uint32_t pages() const { return pages_; }
  std::uint32_t hot_count() const { return hot_count_; }

  // Number of writes a trace can supply; synthetic streams are unbounded.
  std::optional<std::uint64_t> length() const {
    if (spec_.kind == WorkloadKind::kTrace) return trace_.size();
    return std::nullopt;
  }

  PageId next() {
    switch (spec_.kind) {
      case WorkloadKind::kUniform:
        return static_cast<PageId>(rng_.below(pages_));
      case WorkloadKind::kHotCold:
        if (rng_.unit() < spec_.hot_update_fraction)
          return permutation_[rng_.below(hot_count_)];
        return permutation_[hot_count_ + rng_.below(pages_ - hot_count_)];
      case WorkloadKind::kZipfian:
        return permutation_[alias_.sample(rng_)];
      case WorkloadKind::kTrace:
        if (trace_pos_ >= trace_.size()) throw SimulationFault("trace exhausted");
        return trace_[trace_pos_++];
    }
    return 0;
  }

  // Exact per-update probability of every page, matching next().
  std::vector<double> oracle() const {
    std::vector<double> p(pages_, 0.0);
    switch (spec_.kind) {
      case WorkloadKind::kUniform:
        std::fill(p.begin(), p.end(), 1.0 / pages_);
        break;
      case WorkloadKind::kHotCold: {
        const double hot = spec_.hot_update_fraction / hot_count_;
        const double cold = (1.0 - spec_.hot_update_fraction) / (pages_ - hot_count_);
        for (std::uint32_t i = 0; i < pages_; ++i)
          p[permutation_[i]] = i < hot_count_ ? hot : cold;
        break;
      }
      case WorkloadKind::kZipfian: {
        const auto w = zipf_weights(pages_, spec_.zipf_theta);
        double total = 0.0;
        for (double x : w) total += x;
        for (std::uint32_t r = 0; r < pages_; ++r) p[permutation_[r]] = w[r] / total;
        break;
      }
      case WorkloadKind::kTrace:
        throw ConfigError("trace workloads have no frequency oracle");
    }
    return p;
  }

  // Rank r (0-based) has weight 1 / (r + 1)^theta.
  static std::vector<double> zipf_weights(std::uint32_t n, double theta) {
    std::vector<double> w(n);
    for (std::uint32_t r = 0; r < n; ++r) w[r] = std::pow(static_cast<double>(r + 1), -theta);
    return w;
  }

 private:
  WorkloadSpec spec_;
  std::uint32_t pages_;
  Rng rng_;
  std::uint32_t hot_count_ = 0;
  std::vector<std::uint32_t> permutation_;
  AliasTable alias_;
  std::vector<PageId> trace_;
  std::size_t trace_pos_ = 0;
};

}  // namespace lsgc
