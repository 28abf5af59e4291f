#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "lsgc/workload.hpp"

namespace lsgc {
namespace {

WorkloadSpec spec_of(WorkloadKind kind, double param = 0.0, std::uint64_t seed = 1) {
  WorkloadSpec s;
  s.kind = kind;
  if (kind == WorkloadKind::kHotCold) s.hot_update_fraction = param;
  if (kind == WorkloadKind::kZipfian) s.zipf_theta = param;
  s.seed = seed;
  return s;
}

std::vector<std::uint64_t> histogram(WorkloadGenerator& g, std::uint64_t draws) {
  std::vector<std::uint64_t> counts(g.pages(), 0);
  for (std::uint64_t i = 0; i < draws; ++i) ++counts[g.next()];
  return counts;
}

// Upper 0.001 critical value of chi-square with k degrees of freedom
// (Wilson-Hilferty approximation, accurate to well under 1% for k >= 3).
double chi_square_critical(double k) {
  const double z = 3.090232306;  // standard normal 0.999 quantile
  const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * t * t * t;
}

void expect_chi_square_fit(WorkloadKind kind, double param, std::uint32_t pages) {
  WorkloadGenerator g(spec_of(kind, param, 5), pages);
  const auto p = g.oracle();
  constexpr std::uint64_t kDraws = 1'000'000;
  const auto counts = histogram(g, kDraws);
  // Pool cells with small expectation so every cell expects at least 5.
  double chi = 0.0;
  int cells = 0;
  double pooled_expect = 0.0;
  double pooled_count = 0.0;
  for (std::uint32_t i = 0; i < pages; ++i) {
    pooled_expect += p[i] * kDraws;
    pooled_count += static_cast<double>(counts[i]);
    if (pooled_expect >= 5.0) {
      chi += (pooled_count - pooled_expect) * (pooled_count - pooled_expect) / pooled_expect;
      ++cells;
      pooled_expect = pooled_count = 0.0;
    }
  }
  if (pooled_expect > 0.0)
    chi += (pooled_count - pooled_expect) * (pooled_count - pooled_expect) / pooled_expect;
  ASSERT_GT(cells, 2);
  EXPECT_LT(chi, chi_square_critical(cells - 1)) << to_string(kind);
}

TEST(Workload, ChiSquareAgainstOracle) {
  expect_chi_square_fit(WorkloadKind::kUniform, 0.0, 1000);
  expect_chi_square_fit(WorkloadKind::kHotCold, 0.8, 1000);
  expect_chi_square_fit(WorkloadKind::kHotCold, 0.9, 1000);
  expect_chi_square_fit(WorkloadKind::kZipfian, 0.99, 1000);
  expect_chi_square_fit(WorkloadKind::kZipfian, 1.35, 1000);
}

TEST(Workload, UniformFourPages) {
  WorkloadGenerator g(spec_of(WorkloadKind::kUniform), 4);
  const auto counts = histogram(g, 1'000'000);
  const double sigma = std::sqrt(1e6 * 0.25 * 0.75);
  for (auto c : counts) EXPECT_NEAR(static_cast<double>(c), 250000.0, 3 * sigma);
}

TEST(Workload, HotColdTenPages) {
  WorkloadGenerator g(spec_of(WorkloadKind::kHotCold, 0.8), 10);
  EXPECT_EQ(g.hot_count(), 2u);
  const auto p = g.oracle();
  const auto counts = histogram(g, 1'000'000);
  double hot_draws = 0.0;
  for (std::uint32_t i = 0; i < 10; ++i)
    if (p[i] > 0.1) hot_draws += static_cast<double>(counts[i]);
  EXPECT_NEAR(hot_draws / 1e6, 0.8, 3 * std::sqrt(0.8 * 0.2 / 1e6));
}

TEST(Workload, ZipfTopFifthShare) {
  constexpr std::uint32_t kPages = 100000;
  // Oracle: partial sums of 1 / r^0.99.
  double top = 0.0;
  double all = 0.0;
  for (std::uint32_t r = 1; r <= kPages; ++r) {
    const double w = std::pow(static_cast<double>(r), -0.99);
    all += w;
    if (r <= kPages / 5) top += w;
  }
  const double expected_share = top / all;
  EXPECT_GT(expected_share, 0.8);
  EXPECT_LT(expected_share, 0.9);
  WorkloadGenerator g(spec_of(WorkloadKind::kZipfian, 0.99), kPages);
  const auto p = g.oracle();
  std::vector<double> sorted_p(p);
  std::sort(sorted_p.begin(), sorted_p.end(), std::greater<>());
  const double threshold = sorted_p[kPages / 5 - 1];
  const auto counts = histogram(g, 1'000'000);
  double hot = 0.0;
  for (std::uint32_t i = 0; i < kPages; ++i)
    if (p[i] >= threshold) hot += static_cast<double>(counts[i]);
  EXPECT_NEAR(hot / 1e6, expected_share, 0.005);
}

TEST(Oracle, SumsToOneAndMatchesDefinitions) {
  for (auto [kind, param] : {std::pair{WorkloadKind::kUniform, 0.0},
                             {WorkloadKind::kHotCold, 0.8},
                             {WorkloadKind::kZipfian, 0.99}}) {
    WorkloadGenerator g(spec_of(kind, param), 100);
    const auto p = g.oracle();
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  }
  WorkloadGenerator u(spec_of(WorkloadKind::kUniform), 100);
  for (double x : u.oracle()) EXPECT_DOUBLE_EQ(x, 0.01);

  WorkloadGenerator hc(spec_of(WorkloadKind::kHotCold, 0.8), 100);
  const auto hp = hc.oracle();
  const double hi = *std::max_element(hp.begin(), hp.end());
  const double lo = *std::min_element(hp.begin(), hp.end());
  EXPECT_NEAR(hi / lo, 16.0, 1e-9);

  const auto w = WorkloadGenerator::zipf_weights(10, 0.99);
  EXPECT_NEAR(w[0] / w[1], std::pow(2.0, 0.99), 1e-12);
}

TEST(Workload, SeedDeterminism) {
  for (auto kind : {WorkloadKind::kUniform, WorkloadKind::kHotCold, WorkloadKind::kZipfian}) {
    const double param = kind == WorkloadKind::kZipfian ? 0.99 : 0.8;
    WorkloadGenerator a(spec_of(kind, param, 42), 5000);
    WorkloadGenerator b(spec_of(kind, param, 42), 5000);
    WorkloadGenerator c(spec_of(kind, param, 43), 5000);
    bool differs = false;
    for (int i = 0; i < 10000; ++i) {
      const PageId x = a.next();
      ASSERT_EQ(x, b.next());
      differs |= x != c.next();
    }
    EXPECT_TRUE(differs);
  }
}

// Spearman correlation between page id and its update probability.
double rank_correlation(const std::vector<double>& p) {
  const std::size_t n = p.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return p[a] < p[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && p[idx[j]] == p[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j - 1);
    for (std::size_t k = i; k < j; ++k) rank[idx[k]] = avg;
    i = j;
  }
  const double mean = 0.5 * static_cast<double>(n - 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - mean;
    const double dy = rank[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return sxy / std::sqrt(sxx * syy);
}

TEST(Workload, FrequencyIsNotSpatiallyClustered) {
  constexpr std::uint32_t kPages = 20000;
  const double bound = 4.0 / std::sqrt(static_cast<double>(kPages));
  WorkloadGenerator z(spec_of(WorkloadKind::kZipfian, 0.99), kPages);
  EXPECT_LT(std::abs(rank_correlation(z.oracle())), bound);
  WorkloadGenerator h(spec_of(WorkloadKind::kHotCold, 0.8), kPages);
  EXPECT_LT(std::abs(rank_correlation(h.oracle())), bound);
}

TEST(WorkloadSpec, Validation) {
  EXPECT_THROW(WorkloadGenerator(spec_of(WorkloadKind::kHotCold, 0.4), 10), ConfigError);
  EXPECT_THROW(WorkloadGenerator(spec_of(WorkloadKind::kHotCold, 1.0), 10), ConfigError);
  EXPECT_THROW(WorkloadGenerator(spec_of(WorkloadKind::kZipfian, 0.0), 10), ConfigError);
  EXPECT_THROW(WorkloadGenerator(spec_of(WorkloadKind::kTrace), 10), ConfigError);
  EXPECT_THROW(parse_workload_kind("gaussian"), ConfigError);
}

TEST(Trace, ParsesIdsAndSkipsComments) {
  std::istringstream in("1\n2\n#comment\n1\n");
  EXPECT_EQ(parse_trace(in, 10), (std::vector<PageId>{1, 2, 1}));
  std::istringstream empty("");
  EXPECT_TRUE(parse_trace(empty, 10).empty());
}

TEST(Trace, ErrorsCarryLineNumbers) {
  std::istringstream bad("1\n2\nx7\n");
  try {
    parse_trace(bad, 10);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream range("1\n10\n");
  try {
    parse_trace(range, 10);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream blank("1\n\n2\n");
  EXPECT_THROW(parse_trace(blank, 10), ParseError);
}

TEST(Trace, GeneratorReplaysInOrderAndHasNoOracle) {
  auto g = WorkloadGenerator::from_trace({3, 1, 4}, 5);
  EXPECT_EQ(g.length(), 3u);
  EXPECT_EQ(g.next(), 3u);
  EXPECT_EQ(g.next(), 1u);
  EXPECT_EQ(g.next(), 4u);
  EXPECT_THROW(g.next(), SimulationFault);
  EXPECT_THROW(g.oracle(), ConfigError);
  EXPECT_THROW(WorkloadGenerator::from_trace({5}, 5), ConfigError);
}

TEST(AliasTable, ReproducesWeights) {
  const std::vector<double> w = {1, 2, 3, 4};
  AliasTable t(w);
  Rng rng(3);
  std::vector<double> counts(4, 0.0);
  for (int i = 0; i < 400000; ++i) ++counts[t.sample(rng)];
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(counts[i] / 400000.0, w[i] / 10.0, 0.005);
}

TEST(Rng, BelowStaysInRange) {
  Rng rng(1);
  for (std::uint64_t n : {1ull, 2ull, 3ull, 1000ull, (1ull << 63) + 5})
    for (int i = 0; i < 1000; ++i) ASSERT_LT(rng.below(n), n);
  const auto perm = random_permutation(100, rng);
  std::vector<std::uint32_t> sorted(perm);
  std::sort(sorted.begin(), sorted.end());
  for (std::uint32_t i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
}

}  // namespace
}  // namespace lsgc
