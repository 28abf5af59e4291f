#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lsgc/config.hpp"
#include "lsgc/error.hpp"
#include "lsgc/model.hpp"
#include "lsgc/multilog.hpp"
#include "lsgc/policy.hpp"
#include "lsgc/workload.hpp"

namespace lsgc {

// Raw write counters. user_writes counts clock ticks; user_page_writes
// counts versions handed to the store, which is fewer when rewrites of
// staged pages are absorbed.
struct Counters {
  std::uint64_t user_writes = 0;
  std::uint64_t user_page_writes = 0;
  std::uint64_t gc_writes = 0;
  // Relocations superseded by a user write while still staged.
  std::uint64_t gc_dropped = 0;
  std::uint64_t cleanings = 0;
  std::uint64_t cycles = 0;
  std::uint64_t seals = 0;
  double emptiness_sum = 0.0;
};

struct WampReport {
  std::uint64_t user_writes = 0;
  std::uint64_t gc_writes = 0;
  double wamp_cumulative = std::numeric_limits<double>::quiet_NaN();
  double wamp_window = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t cleanings = 0;
  double avg_E_at_clean = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t window_user_writes = 0;
  std::uint64_t window_gc_writes = 0;
  std::uint64_t window_cleanings = 0;
  bool window_defined = false;

  // Per-segment write cost implied by the windowed amplification, 2 (1 + Wamp).
  double implied_cost() const { return 2.0 * (1.0 + wamp_window); }
};

// Builds a report from cumulative counters and the counters captured when
// the measurement window opened.
inline WampReport wamp_report(const Counters& total, const Counters& at_window_start) {
  WampReport r;
  r.user_writes = total.user_writes;
  r.gc_writes = total.gc_writes;
  r.cleanings = total.cleanings;
  if (total.user_writes > 0)
    r.wamp_cumulative =
        static_cast<double>(total.gc_writes) / static_cast<double>(total.user_writes);
  r.window_user_writes = total.user_writes - at_window_start.user_writes;
  r.window_gc_writes = total.gc_writes - at_window_start.gc_writes;
  r.window_cleanings = total.cleanings - at_window_start.cleanings;
  r.window_defined = r.window_user_writes > 0;
  if (r.window_defined)
    r.wamp_window = static_cast<double>(r.window_gc_writes) /
                    static_cast<double>(r.window_user_writes);
  if (r.window_cleanings > 0)
    r.avg_E_at_clean = (total.emptiness_sum - at_window_start.emptiness_sum) /
                       static_cast<double>(r.window_cleanings);
  return r;
}

// One cleaning cycle, for optional per-cycle tracing.
struct CycleRecord {
  std::uint64_t cycle = 0;
  std::uint64_t u_now = 0;
  std::vector<SegmentId> victims;
  std::vector<double> emptiness;
};

using CycleSink = std::function<void(const CycleRecord&)>;

// Pages waiting to be packed into segments. Staged pages already occupy
// open segments reserved for them (so they count against store space) and
// are laid out for real when the buffer is flushed.
struct StagingBuffer {
  SegmentState stream = SegmentState::kOpenUser;
  std::size_t capacity = 0;
  std::vector<PageId> entries;
  std::vector<double> keys;  // sort key captured when staged
  std::vector<std::uint8_t> live;  // 0 once superseded
  std::vector<SegmentId> segments;
  std::size_t dead = 0;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  bool full() const { return entries.size() >= capacity; }
};

// Drives one store: user write path, staging buffers, cleaning and
// accounting. Single-threaded; one instance per run.
class Simulator {
 public:
  // With absorb_rewrites a rewrite of a page still staged replaces the
  // staged copy; otherwise the stale copy keeps its slot and is laid out as
  // a dead page.
  Simulator(const StoreConfig& config, const PolicyConfig& policy,
            std::vector<double> oracle = {}, bool absorb_rewrites = false)
      : store_((config.validate(), config)),
        policy_(policy.normalized()),
        absorb_(absorb_rewrites) {
    if (policy_.uses_oracle()) {
      if (oracle.size() != store_.pages.size())
        throw ConfigError(policy_.name() + " needs a frequency oracle for every page");
      store_.page_rate = std::move(oracle);
    }
    const std::size_t capacity =
        static_cast<std::size_t>(config.sort_buffer_segments) * store_.slots_per_segment;
    user_buf_.stream = SegmentState::kOpenUser;
    user_buf_.capacity = capacity;
    gc_buf_.stream = SegmentState::kOpenGc;
    gc_buf_.capacity = capacity;
  }

  const StoreState& store() const { return store_; }
  StoreState& mutable_store() { return store_; }
  const PolicyConfig& policy() const { return policy_; }
  const Counters& counters() const { return counters_; }
  const LogSet& logs() const { return logs_; }
  std::size_t buffered() const { return user_buf_.size() - user_buf_.dead; }
  std::size_t gc_buffered() const { return gc_buf_.size() - gc_buf_.dead; }

  void set_cycle_sink(CycleSink sink) { sink_ = std::move(sink); }

  // Writes every logical page once, in id order, before measurement. The
  // clock does not move and every page starts with u_p2 = 0.
  void load() {
    const auto pages = static_cast<PageId>(store_.pages.size());
    int load_log = -1;
    if (policy_.is_multi_log() && !policy_.uses_oracle()) load_log = logs_.route(1.0);
    SegmentId open = kNoSegment;
    for (PageId p = 0; p < pages; ++p) {
      PageRecord& rec = store_.pages[p];
      if (rec.segment != kNoSegment) throw SimulationFault("load of a mapped page");
      rec.u_p2 = first_write_u_p2({});
      rec.last_write = store_.clock.now();
      rec.has_history = true;
      if (policy_.is_multi_log()) {
        const int log = load_log >= 0 ? load_log : logs_.route(store_.rate(p) * pages);
        write_to_log(log, p, /*from_gc=*/true);
        continue;
      }
      if (open == kNoSegment) open = store_.allocate(SegmentState::kOpenUser);
      store_.append(open, p);
      if (store_.is_full(open)) {
        seal(open);
        open = kNoSegment;
      }
    }
    if (open != kNoSegment) seal(open);
    if (policy_.is_multi_log()) {
      for (int id : std::vector<int>(logs_.order())) {
        Log& l = logs_.log(id);
        if (l.open != kNoSegment) {
          seal(l.open);
          logs_.push_sealed(id, l.open);
          l.open = kNoSegment;
        }
      }
    }
  }

  // One user update of `page`.
  void user_write(PageId page) {
    if (page >= store_.pages.size())
      throw SimulationFault("workload fault: page " + std::to_string(page) +
                            " outside the logical store");
    store_.clock.tick();
    ++counters_.user_writes;
    const double now = store_.clock.now();
    PageRecord& rec = store_.pages[page];
    const double old_u_p2 = rec.u_p2;
    const bool had_history = rec.has_history;
    if (had_history) {
      rec.u_p2 = update_u_p2(old_u_p2, now);
    } else {
      rec.u_p2 = first_write_u_p2(known_buffer_history());
      rec.has_history = true;
    }
    rec.last_write = now;

    if (policy_.is_multi_log()) {
      if (rec.segment != kNoSegment) overwrite(page);
      double freq;
      if (policy_.uses_oracle()) {
        freq = store_.rate(page) * static_cast<double>(store_.pages.size());
      } else {
        const double gap = had_history ? std::max(now - old_u_p2, 1.0) : now;
        freq = 2.0 * static_cast<double>(store_.pages.size()) / gap;
      }
      const int log = logs_.route(freq);
      ++counters_.user_page_writes;
      write_to_log(log, page, /*from_gc=*/false);
      return;
    }

    if (rec.buffered) {
      const bool user_stream = store_.segments[rec.segment].state == SegmentState::kOpenUser;
      if (user_stream && absorb_) return;
      unstage(user_stream ? user_buf_ : gc_buf_, page);
    } else if (rec.segment != kNoSegment) {
      overwrite(page);
    }
    if (!sort_user_writes()) {
      append_direct(user_open_, SegmentState::kOpenUser, page);
      ++counters_.user_page_writes;
      return;
    }
    if (user_buf_.size() % store_.slots_per_segment == 0) ensure_free_segments();
    stage(user_buf_, page);
    ++counters_.user_page_writes;
    if (user_buf_.full()) flush(user_buf_);
  }

  // Packs both staging buffers. Called at the end of a run.
  void flush() {
    flush(user_buf_);
    flush(gc_buf_);
  }

  // One cleaning cycle. Returns the number of relocated pages.
  std::size_t gc_cycle() {
    if (policy_.is_multi_log()) return multilog_clean(pressured_log_);
    const auto victims =
        select_victims(policy_, store_.segments, store_.config.gc_batch,
                       store_.clock.now(), store_.segment_bytes);
    reclaimed_ = false;
    if (victims.empty()) return 0;
    CycleRecord record;
    record.cycle = counters_.cycles++;
    record.u_now = store_.clock.u_now;
    std::vector<PageId> survivors;
    for (SegmentId v : victims) {
      const double e = store_.segments[v].emptiness(store_.segment_bytes);
      record.victims.push_back(v);
      record.emptiness.push_back(e);
      counters_.emptiness_sum += e;
      ++counters_.cleanings;
      if (e > 0.0) reclaimed_ = true;
      auto moved = store_.evacuate(v);
      survivors.insert(survivors.end(), moved.begin(), moved.end());
      free_segment(store_, v);
    }
    counters_.gc_writes += survivors.size();
    if (sort_gc_writes()) {
      for (PageId p : survivors) {
        stage(gc_buf_, p);
        if (gc_buf_.full()) flush(gc_buf_);
      }
    } else {
      for (PageId p : survivors) append_direct(gc_open_, SegmentState::kOpenGc, p);
    }
    if (sink_) sink_(record);
    return survivors.size();
  }

 private:
  bool sort_user_writes() const { return policy_.is_mdc() && policy_.separate_user_writes; }

  bool sort_gc_writes() const {
    if (policy_.is_mdc()) return policy_.separate_gc_writes;
    return policy_.kind == PolicyKind::kCostBenefit;
  }

  // Ascending key = coldest first. Cost-benefit sorts relocations by age.
  // Ties are broken by page id.
  double sort_key(PageId p) const {
    if (policy_.kind == PolicyKind::kMdcOpt) return store_.rate(p);
    if (policy_.kind == PolicyKind::kCostBenefit) return store_.pages[p].last_write;
    return store_.pages[p].u_p2;
  }

  std::vector<double> known_buffer_history() const {
    std::vector<double> known;
    for (std::size_t i = 0; i < user_buf_.size(); ++i) {
      const PageId p = user_buf_.entries[i];
      if (user_buf_.live[i] && store_.pages[p].has_history) known.push_back(store_.pages[p].u_p2);
    }
    return known;
  }

  void seal(SegmentId seg) {
    store_.seal(seg);
    ++counters_.seals;
  }

  void overwrite(PageId page) {
    const SegmentMeta& m = note_overwrite(store_, page);
    if (m.log_id < 0) return;
    --logs_.log(m.log_id).live_pages;
    // A log segment with nothing live left is reclaimed on the spot rather
    // than waiting for its log to come under pressure.
    if (m.state == SegmentState::kSealed && m.live == 0) {
      logs_.remove_sealed(m.log_id, m.id);
      counters_.emptiness_sum += 1.0;
      ++counters_.cleanings;
      free_segment(store_, m.id);
    }
  }

  void append_direct(SegmentId& open, SegmentState stream, PageId page) {
    if (open == kNoSegment) {
      if (stream == SegmentState::kOpenUser) ensure_free_segments();
      open = store_.allocate(stream);
    }
    store_.append(open, page);
    if (store_.is_full(open)) {
      seal(open);
      open = kNoSegment;
    }
  }

  // Adds a page to a staging buffer, reserving a fresh segment for every S
  // staged entries.
  void stage(StagingBuffer& buf, PageId page) {
    const std::uint32_t per = store_.slots_per_segment;
    if (buf.size() % per == 0) buf.segments.push_back(store_.allocate(buf.stream));
    const std::size_t index = buf.size();
    const SegmentId seg = buf.segments[index / per];
    SegmentMeta& m = store_.segments[seg];
    PageRecord& rec = store_.pages[page];
    ++m.fill;
    ++m.live;
    m.free_bytes -= rec.size;
    m.live_rate += store_.rate(page);
    rec.segment = seg;
    rec.slot = static_cast<std::uint32_t>(index);
    rec.buffered = true;
    buf.entries.push_back(page);
    buf.keys.push_back(sort_key(page));
    buf.live.push_back(1);
  }

  void unstage(StagingBuffer& buf, PageId page) {
    PageRecord& rec = store_.pages[page];
    if (!rec.buffered || rec.slot >= buf.size() || buf.entries[rec.slot] != page ||
        !buf.live[rec.slot])
      throw SimulationFault("staging buffer disagrees with page " + std::to_string(page));
    SegmentMeta& m = store_.segments[rec.segment];
    buf.live[rec.slot] = 0;
    ++buf.dead;
    --m.live;
    m.free_bytes += rec.size;
    m.live_rate = m.live == 0 ? 0.0 : std::max(0.0, m.live_rate - store_.rate(page));
    rec.segment = kNoSegment;
    rec.buffered = false;
    if (buf.stream == SegmentState::kOpenGc) ++counters_.gc_dropped;
  }

  // Packs a staging buffer into its reserved segments, sorted by update
  // history when the buffer's stream is separated, and seals them. Superseded
  // entries are dropped, or laid out as dead slots when rewrites are not
  // absorbed. Reserved segments left unused go back to the free list.
  void flush(StagingBuffer& buf) {
    if (buf.empty()) return;
    const bool keep_dead = !absorb_;
    std::vector<std::size_t> order;
    order.reserve(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i)
      if (buf.live[i] || keep_dead) order.push_back(i);
    const bool sorted = buf.stream == SegmentState::kOpenUser ? sort_user_writes()
                                                               : sort_gc_writes();
    if (sorted) {
      std::stable_sort(order.begin(), order.end(), [&buf](std::size_t x, std::size_t y) {
        if (buf.keys[x] != buf.keys[y]) return buf.keys[x] < buf.keys[y];
        return buf.entries[x] < buf.entries[y];
      });
    }
    for (SegmentId seg : buf.segments) {
      SegmentMeta& m = store_.segments[seg];
      m.fill = 0;
      m.live = 0;
      m.free_bytes = store_.segment_bytes;
      m.live_rate = 0.0;
    }
    const std::uint32_t per = store_.slots_per_segment;
    for (std::size_t j = 0; j < order.size(); ++j) {
      const SegmentId seg = buf.segments[j / per];
      if (!buf.live[order[j]]) ++store_.segments[seg].fill;
      else store_.append(seg, buf.entries[order[j]]);
    }
    const std::size_t used = (order.size() + per - 1) / per;
    for (std::size_t i = 0; i < buf.segments.size(); ++i) {
      if (i < used) seal(buf.segments[i]);
      else free_segment(store_, buf.segments[i]);
    }
    buf.entries.clear();
    buf.keys.clear();
    buf.live.clear();
    buf.segments.clear();
    buf.dead = 0;
  }

  // Cleans until the free list is back at the trigger level. With nothing
  // free, cleaning carries on past victims that reclaim no space; a whole
  // pass over the store without reclaiming anything means it is wedged.
  void ensure_free_segments() {
    while (store_.free_list.size() < store_.config.gc_trigger_free) {
      gc_cycle();
      if (!note_progress("cleaning livelock: no victim reclaims space at u_now=")) break;
    }
  }

  // False when cleaning should stop for now.
  bool note_progress(const char* livelock_message) {
    if (reclaimed_) {
      stalled_ = 0;
      return true;
    }
    if (++stalled_ > store_.segments.size())
      throw CleaningLivelock(livelock_message + std::to_string(store_.clock.u_now));
    return store_.free_list.empty();
  }

  // ---- multi-log ----

  std::size_t multilog_reserve() const {
    return std::max<std::size_t>(store_.config.gc_trigger_free, logs_.size() + 2);
  }

  void write_to_log(int log_id, PageId page, bool from_gc) {
    Log* log = &logs_.log(log_id);
    if (log->open == kNoSegment) {
      if (!from_gc) {
        pressured_log_ = log_id;
        while (store_.free_list.size() < multilog_reserve()) {
          multilog_clean(log_id);
          if (!note_progress("cleaning livelock in multi-log at u_now=")) break;
        }
        log = &logs_.log(route_existing(log_id, page));
      }
      if (log->open == kNoSegment) {
        log->open = store_.allocate(SegmentState::kOpenUser);
        store_.segments[log->open].log_id = log->id;
      }
    }
    store_.append(log->open, page);
    ++log->live_pages;
    if (store_.is_full(log->open)) {
      seal(log->open);
      logs_.push_sealed(log->id, log->open);
      log->open = kNoSegment;
    }
  }

  // Cleaning may have merged the target log away; re-resolve it.
  int route_existing(int log_id, PageId page) {
    for (int id : logs_.order())
      if (id == log_id) return log_id;
    return logs_.route(page_frequency(page));
  }

  // Normalized update frequency of a page (1 = average page).
  double page_frequency(PageId p) const {
    const double pages = static_cast<double>(store_.pages.size());
    if (policy_.uses_oracle()) return store_.rate(p) * pages;
    return 2.0 * pages / std::max(store_.clock.now() - store_.pages[p].u_p2, 1.0);
  }

  std::size_t multilog_clean(int pressured) {
    reclaimed_ = false;
    if (logs_.size() == 0) return 0;
    if (std::find(logs_.order().begin(), logs_.order().end(), pressured) ==
        logs_.order().end())
      pressured = logs_.order().front();
    const auto victim = logs_.select_victim(pressured, store_);
    if (!victim) return 0;
    const SegmentId v = *victim;
    SegmentMeta& vm = store_.segments[v];
    const int owner = vm.log_id;
    CycleRecord record;
    record.cycle = counters_.cycles++;
    record.u_now = store_.clock.u_now;
    const double e = vm.emptiness(store_.segment_bytes);
    record.victims.push_back(v);
    record.emptiness.push_back(e);
    counters_.emptiness_sum += e;
    ++counters_.cleanings;
    reclaimed_ = e > 0.0;
    auto survivors = store_.evacuate(v);
    logs_.remove_sealed(owner, v);
    logs_.log(owner).live_pages -= survivors.size();
    free_segment(store_, v);
    for (PageId p : survivors) write_to_log(logs_.route(page_frequency(p)), p, /*from_gc=*/true);
    counters_.gc_writes += survivors.size();
    merge_small_logs();
    if (sink_) sink_(record);
    return survivors.size();
  }

  void merge_small_logs() {
    while (auto pair = logs_.find_mergeable(store_.slots_per_segment)) {
      const auto [keep, absorb] = *pair;
      Log& a = logs_.log(absorb);
      if (a.open != kNoSegment) {
        if (store_.segments[a.open].fill == 0) {
          free_segment(store_, a.open);
        } else {
          seal(a.open);
          logs_.push_sealed(absorb, a.open);
        }
        a.open = kNoSegment;
      }
      logs_.merge(keep, absorb, store_);
    }
  }

  StoreState store_;
  PolicyConfig policy_;
  bool absorb_ = false;
  Counters counters_;
  StagingBuffer user_buf_;
  StagingBuffer gc_buf_;
  SegmentId user_open_ = kNoSegment;
  SegmentId gc_open_ = kNoSegment;
  LogSet logs_;
  int pressured_log_ = -1;
  bool reclaimed_ = false;
  std::size_t stalled_ = 0;
  CycleSink sink_;
};

struct RunSpec {
  StoreConfig config;
  PolicyConfig policy;
  WorkloadSpec workload;
  // Defaults to write_multiplier x logical pages, or the whole trace.
  std::optional<std::uint64_t> total_user_writes;
  double write_multiplier = 100.0;
  // Trailing fraction of user writes that is measured.
  double measure_window = 0.5;
  std::uint64_t seed = 1;
  // See Simulator: whether a rewrite of a staged page replaces it.
  bool absorb_rewrites = false;
  CycleSink cycle_sink;
  // Pre-parsed trace ids; used instead of workload.trace_path when set.
  std::optional<std::vector<PageId>> trace;
};

inline WampReport run(const RunSpec& spec) {
  spec.config.validate();
  if (!(spec.measure_window > 0.0 && spec.measure_window <= 1.0))
    throw ConfigError("measure_window must lie in (0, 1]");
  const std::uint32_t pages = spec.config.logical_pages();
  WorkloadSpec wl = spec.workload;
  wl.seed = spec.seed;
  const bool is_trace = wl.kind == WorkloadKind::kTrace;
  if (is_trace && spec.policy.uses_oracle())
    throw ConfigError(spec.policy.name() +
                      " needs exact page frequencies, which a trace cannot provide");
  WorkloadGenerator gen = spec.trace ? WorkloadGenerator::from_trace(*spec.trace, pages)
                                     : WorkloadGenerator(wl, pages);
  std::vector<double> oracle;
  if (spec.policy.uses_oracle()) oracle = gen.oracle();

  Simulator sim(spec.config, spec.policy, std::move(oracle), spec.absorb_rewrites);
  if (spec.cycle_sink) sim.set_cycle_sink(spec.cycle_sink);
  sim.load();

  std::uint64_t total = 0;
  if (spec.total_user_writes) {
    total = *spec.total_user_writes;
  } else if (is_trace) {
    total = *gen.length();
  } else {
    total = static_cast<std::uint64_t>(std::llround(spec.write_multiplier * pages));
  }
  if (is_trace) total = std::min(total, *gen.length());
  const auto window = static_cast<std::uint64_t>(
      std::ceil(spec.measure_window * static_cast<double>(total)));
  const std::uint64_t window_start = total - std::min(window, total);

  Counters at_start = sim.counters();
  for (std::uint64_t i = 0; i < total; ++i) {
    if (i == window_start) at_start = sim.counters();
    sim.user_write(gen.next());
  }
  sim.flush();
  return wamp_report(sim.counters(), at_start);
}

}  // namespace lsgc
