#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <set>
#include <vector>

#include "lsgc/engine.hpp"
#include "toy.hpp"

namespace lsgc {
namespace {

using testing::toy_config;

const char* const kAllPolicies[] = {
    "age",           "greedy",          "cost_benefit",       "cost_benefit_text",
    "multi_log",     "multi_log_opt",   "mdc",                "mdc_opt",
    "mdc_no_sep_user", "mdc_no_sep_user_gc", "mdc_opt_no_sep_user", "mdc_opt_no_sep_user_gc"};

std::vector<double> oracle_for(const PolicyConfig& p, const WorkloadGenerator& g) {
  return p.uses_oracle() ? g.oracle() : std::vector<double>{};
}

std::uint64_t open_fill(const StoreState& s) {
  std::uint64_t n = 0;
  for (const auto& m : s.segments)
    if (m.state == SegmentState::kOpenUser || m.state == SegmentState::kOpenGc) n += m.fill;
  return n;
}

// ---- wamp accounting ----

TEST(WampReport, Arithmetic) {
  Counters zero;
  Counters c;
  c.user_writes = 1000;
  const WampReport none = wamp_report(c, zero);
  EXPECT_EQ(none.wamp_cumulative, 0.0);
  c.gc_writes = 1000;
  const WampReport r = wamp_report(c, zero);
  EXPECT_EQ(r.wamp_cumulative, 1.0);
  EXPECT_EQ(r.wamp_window, 1.0);
  EXPECT_EQ(r.implied_cost(), 4.0);
}

TEST(WampReport, WindowSubtractsStartCounters) {
  Counters start;
  start.user_writes = 100;
  start.gc_writes = 50;
  start.cleanings = 2;
  start.emptiness_sum = 0.8;
  Counters end;
  end.user_writes = 300;
  end.gc_writes = 250;
  end.cleanings = 6;
  end.emptiness_sum = 2.4;
  const WampReport r = wamp_report(end, start);
  EXPECT_EQ(r.window_user_writes, 200u);
  EXPECT_EQ(r.wamp_window, 1.0);
  EXPECT_DOUBLE_EQ(r.avg_E_at_clean, 0.4);
  EXPECT_DOUBLE_EQ(r.wamp_cumulative, 250.0 / 300.0);
}

TEST(Run, NoWritesLeavesWampUndefined) {
  RunSpec spec;
  spec.config = toy_config();
  spec.policy = parse_policy("greedy");
  spec.total_user_writes = 0;
  const WampReport r = run(spec);
  EXPECT_EQ(r.gc_writes, 0u);
  EXPECT_TRUE(std::isnan(r.wamp_cumulative));
  EXPECT_TRUE(std::isnan(r.wamp_window));
  EXPECT_FALSE(r.window_defined);
}

TEST(Run, RejectsBadSpecs) {
  RunSpec spec;
  spec.config = toy_config();
  spec.policy = parse_policy("greedy");
  spec.measure_window = 0.0;
  EXPECT_THROW(run(spec), ConfigError);
  spec.measure_window = 0.5;
  spec.config.fill_factor = 1.0;
  EXPECT_THROW(run(spec), ConfigError);
  spec.config = toy_config();
  spec.policy = parse_policy("mdc_opt");
  spec.workload.kind = WorkloadKind::kTrace;
  spec.trace = std::vector<PageId>{1, 2};
  EXPECT_THROW(run(spec), ConfigError);
  EXPECT_THROW(Simulator(toy_config(), parse_policy("mdc_opt")), ConfigError);
}

TEST(Run, MeasurementWindowIsTrailingFraction) {
  RunSpec spec;
  spec.config = toy_config();
  spec.policy = parse_policy("greedy");
  spec.total_user_writes = 1001;
  const WampReport r = run(spec);
  EXPECT_EQ(r.user_writes, 1001u);
  EXPECT_EQ(r.window_user_writes, 501u);
}

// ---- user write path ----

TEST(UserWrite, LoadGivesEveryPageColdHistory) {
  Simulator sim(toy_config(), parse_policy("mdc"));
  sim.load();
  for (const auto& rec : sim.store().pages) {
    EXPECT_TRUE(rec.has_history);
    EXPECT_EQ(rec.u_p2, 0.0);
  }
  EXPECT_EQ(sim.store().clock.u_now, 0u);
  EXPECT_EQ(verify(sim.store()), std::nullopt);
}

TEST(UserWrite, DoubleWriteOfStagedPage) {
  Simulator sim(toy_config(), parse_policy("mdc"));
  sim.load();
  const SegmentId home = sim.store().pages[5].segment;
  sim.user_write(5);
  EXPECT_EQ(sim.store().segments[home].live, 15u);
  sim.user_write(5);
  EXPECT_EQ(sim.store().clock.u_now, 2u);
  EXPECT_EQ(sim.counters().user_writes, 2u);
  EXPECT_EQ(sim.buffered(), 1u);
  EXPECT_EQ(sim.store().segments[home].live, 15u);
  EXPECT_EQ(verify(sim.store()), std::nullopt);
  sim.flush();
  // The superseded copy still occupies a slot when rewrites are not absorbed.
  const SegmentMeta& seg = sim.store().segments[sim.store().pages[5].segment];
  EXPECT_EQ(seg.fill, 2u);
  EXPECT_EQ(seg.live, 1u);
  EXPECT_EQ(verify(sim.store()), std::nullopt);
}

TEST(UserWrite, AbsorbedRewriteReplacesStagedCopy) {
  Simulator sim(toy_config(), parse_policy("mdc"), {}, /*absorb_rewrites=*/true);
  sim.load();
  sim.user_write(5);
  sim.user_write(5);
  EXPECT_EQ(sim.counters().user_writes, 2u);
  EXPECT_EQ(sim.counters().user_page_writes, 1u);
  sim.flush();
  const SegmentMeta& seg = sim.store().segments[sim.store().pages[5].segment];
  EXPECT_EQ(seg.fill, 1u);
  EXPECT_EQ(verify(sim.store()), std::nullopt);
}

TEST(UserWrite, RejectsUnknownPage) {
  Simulator sim(toy_config(), parse_policy("greedy"));
  sim.load();
  EXPECT_THROW(sim.user_write(static_cast<PageId>(sim.store().pages.size())), SimulationFault);
}

TEST(UserWrite, OneFullPassEmptiesEveryLoadSegment) {
  StoreConfig c = toy_config(16, 0.25, 1);
  for (const char* name : {"greedy", "mdc"}) {
    Simulator sim(c, parse_policy(name));
    sim.load();
    std::set<SegmentId> load_segments;
    for (const auto& rec : sim.store().pages) load_segments.insert(rec.segment);
    for (PageId p = 0; p < sim.store().pages.size(); ++p) sim.user_write(p);
    sim.flush();
    EXPECT_EQ(sim.counters().cleanings, 0u) << name;
    for (SegmentId s : load_segments) {
      EXPECT_EQ(sim.store().segments[s].live, 0u) << name;
      EXPECT_EQ(sim.store().segments[s].free_bytes, sim.store().segment_bytes) << name;
    }
  }
}

// ---- staging and sorted packing ----

// Writes S pages with old history and S with recent history, interleaved,
// through a two-segment user buffer.
std::vector<std::set<bool>> packed_groups(const char* policy) {
  Simulator sim(toy_config(32, 0.5, 2), parse_policy(policy));
  sim.load();
  StoreState& st = sim.mutable_store();
  const std::uint32_t S = st.slots_per_segment;
  st.clock.u_now = 2000;
  for (PageId p = 0; p < 2 * S; ++p) st.pages[p].u_p2 = (p % 2 == 0) ? 10.0 : 1000.0;
  for (PageId p = 0; p < 2 * S; ++p) sim.user_write(p);
  sim.flush();
  std::map<SegmentId, std::set<bool>> by_segment;
  for (PageId p = 0; p < 2 * S; ++p) by_segment[st.pages[p].segment].insert(p % 2 == 0);
  std::vector<std::set<bool>> out;
  for (auto& [seg, groups] : by_segment) out.push_back(groups);
  return out;
}

TEST(Staging, SortedFlushSeparatesHistories) {
  const auto groups = packed_groups("mdc");
  ASSERT_EQ(groups.size(), 2u);
  for (const auto& g : groups) EXPECT_EQ(g.size(), 1u);
}

TEST(Staging, UnsortedStreamMixesHistories) {
  const auto groups = packed_groups("mdc_no_sep_user");
  ASSERT_EQ(groups.size(), 2u);
  for (const auto& g : groups) EXPECT_EQ(g.size(), 2u);
}

TEST(Staging, TiesBrokenByPageId) {
  // Cost-benefit sorts relocations by last write. Every loaded page has the
  // same last write, so a cleaned load segment is repacked in id order.
  StoreConfig c = toy_config(16, 0.25, 1);
  c.gc_batch = 1;
  Simulator sim(c, parse_policy("cost_benefit"));
  sim.load();
  const std::uint32_t S = sim.store().slots_per_segment;
  sim.user_write(0);
  sim.gc_cycle();
  sim.flush();
  const SegmentId seg = sim.store().pages[1].segment;
  const auto slots = sim.store().slots(seg);
  std::vector<PageId> got(slots.begin(), slots.begin() + (S - 1));
  std::vector<PageId> want;
  for (PageId p = 1; p < S; ++p) want.push_back(p);
  EXPECT_EQ(got, want);
}

// ---- cleaning ----

StoreConfig batch_of(std::uint32_t batch) {
  StoreConfig c = toy_config(32, 0.5, 2);
  c.gc_batch = batch;
  return c;
}

TEST(GcCycle, EmptyVictimRelocatesNothing) {
  Simulator sim(batch_of(1), parse_policy("greedy"));
  sim.load();
  const std::uint32_t S = sim.store().slots_per_segment;
  for (PageId p = 0; p < S; ++p) sim.user_write(p);
  const std::size_t free_before = sim.store().free_list.size();
  EXPECT_EQ(sim.gc_cycle(), 0u);
  EXPECT_EQ(sim.store().free_list.size(), free_before + 1);
}

TEST(GcCycle, RelocatesLiveShare) {
  Simulator sim(batch_of(1), parse_policy("greedy"));
  sim.load();
  for (PageId p = 0; p < 6; ++p) sim.user_write(p);  // E = 6/16 = 0.375
  EXPECT_EQ(sim.gc_cycle(), 10u);
  EXPECT_EQ(sim.counters().gc_writes, 10u);
  EXPECT_DOUBLE_EQ(sim.counters().emptiness_sum, 0.375);
}

TEST(GcCycle, BatchAccounting) {
  Simulator sim(batch_of(2), parse_policy("greedy"));
  sim.load();
  const std::uint32_t S = sim.store().slots_per_segment;
  for (PageId p = 0; p < S / 2; ++p) sim.user_write(p);
  for (PageId p = S; p < S + S / 2; ++p) sim.user_write(p);
  EXPECT_EQ(sim.gc_cycle(), 2u * S / 2);
  EXPECT_EQ(sim.counters().gc_writes, 2u * S / 2);
  EXPECT_EQ(sim.counters().cleanings, 2u);
}

TEST(GcCycle, WedgedStoreReportsLivelock) {
  Simulator sim(toy_config(), parse_policy("greedy"));
  sim.load();
  StoreState& st = sim.mutable_store();
  while (!st.free_list.empty()) st.allocate(SegmentState::kOpenGc);
  EXPECT_THROW(sim.user_write(0), CleaningLivelock);
}

// ---- traces ----

TEST(Trace, ShortTraceCountsEveryWrite) {
  RunSpec spec;
  spec.config = toy_config();
  spec.policy = parse_policy("mdc");
  spec.workload.kind = WorkloadKind::kTrace;
  spec.trace = std::vector<PageId>{1, 2, 1};
  const WampReport r = run(spec);
  EXPECT_EQ(r.user_writes, 3u);
  EXPECT_EQ(r.gc_writes, 0u);
  spec.trace = std::vector<PageId>{};
  EXPECT_EQ(run(spec).gc_writes, 0u);
}

TEST(Trace, RecordedStreamReplaysIdentically) {
  const StoreConfig c = toy_config(64, 0.8, 2);
  WorkloadSpec wl;
  wl.seed = 9;
  WorkloadGenerator g(wl, c.logical_pages());
  std::vector<PageId> ids(20 * c.logical_pages());
  for (auto& id : ids) id = g.next();
  for (const char* name : {"greedy", "mdc", "multi_log"}) {
    RunSpec gen;
    gen.config = c;
    gen.policy = parse_policy(name);
    gen.workload = wl;
    gen.seed = 9;
    gen.write_multiplier = 20;
    RunSpec replay = gen;
    replay.workload.kind = WorkloadKind::kTrace;
    replay.trace = ids;
    const WampReport a = run(gen);
    const WampReport b = run(replay);
    EXPECT_EQ(a.user_writes, b.user_writes) << name;
    EXPECT_EQ(a.gc_writes, b.gc_writes) << name;
    EXPECT_EQ(a.wamp_window, b.wamp_window) << name;
  }
}

TEST(Trace, SequentialPassesNeedNoRelocation) {
  const StoreConfig c = toy_config(64, 0.8, 2);
  std::vector<PageId> ids;
  for (int pass = 0; pass < 20; ++pass)
    for (PageId p = 0; p < c.logical_pages(); ++p) ids.push_back(p);
  RunSpec spec;
  spec.config = c;
  spec.policy = parse_policy("age");
  spec.workload.kind = WorkloadKind::kTrace;
  spec.trace = ids;
  EXPECT_EQ(run(spec).wamp_window, 0.0);
}

// ---- determinism ----

TEST(Determinism, EqualSpecsGiveIdenticalReports) {
  for (const char* name : kAllPolicies) {
    RunSpec spec;
    spec.config = toy_config(64, 0.8, 2);
    spec.policy = parse_policy(name);
    spec.workload.kind = WorkloadKind::kZipfian;
    spec.write_multiplier = 10;
    spec.seed = 3;
    const WampReport a = run(spec);
    const WampReport b = run(spec);
    EXPECT_EQ(std::memcmp(&a.wamp_window, &b.wamp_window, sizeof(double)), 0) << name;
    EXPECT_EQ(std::memcmp(&a.avg_E_at_clean, &b.avg_E_at_clean, sizeof(double)), 0) << name;
    EXPECT_EQ(a.gc_writes, b.gc_writes) << name;
    EXPECT_EQ(a.cleanings, b.cleanings) << name;
  }
}

// ---- invariants over toy stores ----

struct ToyCase {
  std::uint32_t segments;
  double fill;
  std::uint32_t sort_buffer;
  WorkloadKind kind;
};

class Invariants : public ::testing::TestWithParam<const char*> {};

TEST_P(Invariants, HoldThroughoutRuns) {
  const PolicyConfig policy = parse_policy(GetParam());
  const ToyCase cases[] = {{8, 0.5, 1, WorkloadKind::kUniform},
                           {16, 0.6, 1, WorkloadKind::kHotCold},
                           {32, 0.7, 2, WorkloadKind::kZipfian},
                           {64, 0.8, 4, WorkloadKind::kZipfian},
                           {64, 0.8, 2, WorkloadKind::kHotCold}};
  for (const ToyCase& tc : cases) {
    for (bool absorb : {false, true}) {
      SCOPED_TRACE(std::to_string(tc.segments) + " segments, absorb=" + std::to_string(absorb));
      const StoreConfig c = toy_config(tc.segments, tc.fill, tc.sort_buffer);
      WorkloadSpec wl;
      wl.kind = tc.kind;
      wl.seed = tc.segments;
      WorkloadGenerator gen(wl, c.logical_pages());
      Simulator sim(c, policy, oracle_for(policy, gen), absorb);
      sim.load();
      const StoreState& st = sim.store();
      const std::uint64_t P = st.pages.size();
      const std::uint64_t free_space = c.capacity - P * c.page_size;
      const std::uint64_t writes = 30 * P;
      std::uint64_t last_clock = 0;
      for (std::uint64_t i = 0; i < writes; ++i) {
        sim.user_write(gen.next());
        ASSERT_EQ(st.clock.u_now, last_clock + 1);
        last_clock = st.clock.u_now;
        if (i % 53 != 0) continue;
        const auto err = verify(st);
        ASSERT_EQ(err, std::nullopt) << *err;
        std::uint64_t live = 0;
        std::uint64_t free_bytes = 0;
        for (const auto& m : st.segments) {
          live += m.live;
          free_bytes += m.free_bytes;
          ASSERT_LE(m.free_bytes, st.segment_bytes);
          ASSERT_LE(m.live, st.slots_per_segment);
          if (m.state == SegmentState::kSealed) {
            ASSERT_LE(m.u_p2, m.u_p1 + 1e-9);
            ASSERT_LE(m.u_p1, st.clock.now());
          }
        }
        ASSERT_EQ(live, P);
        ASSERT_EQ(free_bytes, free_space);
      }
      sim.flush();
      ASSERT_EQ(verify(st), std::nullopt);
      const Counters& k = sim.counters();
      EXPECT_EQ(k.user_writes, writes);
      // Every version handed to the store occupies a slot somewhere.
      EXPECT_GE(k.seals * st.slots_per_segment + open_fill(st),
                P + k.user_page_writes + k.gc_writes - k.gc_dropped * absorb);
      if (!absorb) {
        EXPECT_EQ(k.user_page_writes, k.user_writes);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllPolicies, Invariants, ::testing::ValuesIn(kAllPolicies),
                         [](const auto& info) { return std::string(info.param); });

TEST(Invariants, UnsortedStreamsPackExactly) {
  // With no staging and whole segments, slots used equal versions written.
  const StoreConfig c = toy_config(32, 0.5, 1);
  for (const char* name : {"age", "greedy"}) {
    WorkloadSpec wl;
    WorkloadGenerator gen(wl, c.logical_pages());
    Simulator sim(c, parse_policy(name));
    sim.load();
    for (int i = 0; i < 5000; ++i) sim.user_write(gen.next());
    const Counters& k = sim.counters();
    EXPECT_EQ(k.seals * sim.store().slots_per_segment + open_fill(sim.store()),
              sim.store().pages.size() + k.user_writes + k.gc_writes)
        << name;
  }
}

TEST(Invariants, CycleFreesAtLeastVictimsMinusSegmentsFilled) {
  for (const char* name : {"greedy", "mdc", "cost_benefit", "age"}) {
    StoreConfig c = toy_config(64, 0.8, 2);
    c.gc_batch = 4;
    c.gc_trigger_free = 6;
    WorkloadSpec wl;
    wl.kind = WorkloadKind::kHotCold;
    WorkloadGenerator gen(wl, c.logical_pages());
    Simulator sim(c, parse_policy(name));
    sim.load();
    const std::uint32_t S = sim.store().slots_per_segment;
    std::size_t victims = 0;
    double emptiness = 0.0;
    sim.set_cycle_sink([&](const CycleRecord& r) {
      victims = r.victims.size();
      emptiness = 0.0;
      for (double e : r.emptiness) emptiness += e;
    });
    for (int i = 0; i < 20000; ++i) {
      sim.user_write(gen.next());
      if (i % 37 != 0 || sim.store().free_list.size() < 8) continue;
      const auto before = static_cast<long>(sim.store().free_list.size());
      const auto moved = static_cast<long>(sim.gc_cycle());
      const auto after = static_cast<long>(sim.store().free_list.size());
      if (victims == 0) continue;
      ASSERT_GE(after - before, static_cast<long>(victims) - (moved + S - 1) / S) << name;
      if (emptiness > 0.0) {
        ASSERT_GE(after - before, 0) << name;
      }
      if (emptiness >= 1.0) {
        ASSERT_GT(after - before, 0) << name;
      }
    }
  }
}

// ---- steady state against the fixpoint ----

// Independent fixpoint by bisection on E - (1 - exp(-E / F)).
double fixpoint_by_bisection(double fill) {
  double lo = 1e-6;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double g = mid - (1.0 - std::exp(-mid / fill));
    (g < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TEST(SteadyState, UniformAgeMatchesFixpoint) {
  RunSpec spec;
  spec.config.capacity = 256 * kMiB;
  spec.config.sort_buffer_segments = 2;
  spec.config = spec.config.with_proportional_reserve();
  spec.policy = parse_policy("age");
  spec.write_multiplier = 20;
  for (double fill : {0.5, 0.8}) {
    spec.config.fill_factor = fill;
    const WampReport r = run(spec);
    EXPECT_NEAR(r.avg_E_at_clean, fixpoint_by_bisection(fill), 0.01) << fill;
  }
}

TEST(SteadyState, LowFillNeedsAlmostNoCleaning) {
  RunSpec spec;
  spec.config.capacity = 256 * kMiB;
  spec.config.sort_buffer_segments = 2;
  spec.config.fill_factor = 0.2;
  spec.config = spec.config.with_proportional_reserve();
  spec.write_multiplier = 20;
  for (const char* name : {"age", "greedy", "mdc"}) {
    spec.policy = parse_policy(name);
    EXPECT_NEAR(run(spec).wamp_window, 0.007, 0.003) << name;
  }
}

}  // namespace
}  // namespace lsgc
