#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsgc/config.hpp"
#include "lsgc/error.hpp"

namespace lsgc {

inline constexpr SegmentId kNoSegment = std::numeric_limits<SegmentId>::max();
inline constexpr PageId kDeadSlot = std::numeric_limits<PageId>::max();

enum class SegmentState : std::uint8_t { kFree, kOpenUser, kOpenGc, kSealed };

// Per-segment cleaning state. free_bytes is A and live is C; u_p2 is the
// mean penultimate-update estimate of the pages written into the segment
// and u_p1 its last update, taken as the seal time.
struct SegmentMeta {
  SegmentId id = 0;
  SegmentState state = SegmentState::kFree;
  std::uint64_t free_bytes = 0;
  std::uint32_t live = 0;
  std::uint32_t fill = 0;  // slots handed out since the segment was opened
  double u_p2 = 0.0;
  double u_p1 = 0.0;
  std::uint64_t sealed_at = 0;
  // Sum of exact per-update probabilities of the live pages; only maintained
  // when a frequency oracle is attached to the store.
  double live_rate = 0.0;
  std::int32_t log_id = -1;

  double emptiness(std::uint64_t segment_bytes) const {
    return static_cast<double>(free_bytes) / static_cast<double>(segment_bytes);
  }
};

// A page as it is handed to seal_segment.
struct PageLocation {
  PageId page_id = 0;
  SegmentId segment_id = kNoSegment;
  std::uint32_t size = 0;
  double carried_u_p2 = 0.0;
  double last_write = 0.0;
};

// Page table row. While a page sits in the staging buffer, `segment` is the
// open segment reserved for it and `slot` is its buffer index.
struct PageRecord {
  SegmentId segment = kNoSegment;
  std::uint32_t slot = 0;
  std::uint32_t size = 0;
  bool buffered = false;
  bool has_history = false;
  double u_p2 = 0.0;
  double last_write = 0.0;
};

// Seals an open segment holding `pages`. The segment's u_p2 is the mean of
// the pages' carried values; u_p1 is the seal time.
inline void seal_segment(SegmentMeta& meta, std::span<const PageLocation> pages,
                         const Clock& clock, std::uint64_t segment_bytes) {
  if (meta.state != SegmentState::kOpenUser && meta.state != SegmentState::kOpenGc)
    throw SimulationFault("seal of segment " + std::to_string(meta.id) +
                          " which is not open");
  std::uint64_t bytes = 0;
  double sum_u_p2 = 0.0;
  for (const auto& p : pages) {
    bytes += p.size;
    sum_u_p2 += p.carried_u_p2;
  }
  if (bytes > segment_bytes)
    throw SimulationFault("segment " + std::to_string(meta.id) + " overflow: " +
                          std::to_string(bytes) + " bytes");
  meta.state = SegmentState::kSealed;
  meta.free_bytes = segment_bytes - bytes;
  meta.live = static_cast<std::uint32_t>(pages.size());
  meta.sealed_at = clock.u_now;
  meta.u_p1 = clock.now();
  meta.u_p2 = pages.empty() ? clock.now() : sum_u_p2 / static_cast<double>(pages.size());
}

// All mutable state of one simulated store.
struct StoreState {
  explicit StoreState(const StoreConfig& cfg)
      : config(cfg),
        segment_bytes(cfg.segment_size),
        slots_per_segment(cfg.pages_per_segment()),
        segments(cfg.segment_count()),
        pages(cfg.logical_pages()),
        slot_table(static_cast<std::size_t>(cfg.segment_count()) *
                       cfg.pages_per_segment(),
                   kDeadSlot) {
    for (SegmentId id = 0; id < segments.size(); ++id) {
      segments[id].id = id;
      segments[id].free_bytes = segment_bytes;
      free_list.push_back(id);
    }
    for (auto& p : pages) p.size = static_cast<std::uint32_t>(cfg.page_size);
  }

  StoreConfig config;
  std::uint64_t segment_bytes;
  std::uint32_t slots_per_segment;
  std::vector<SegmentMeta> segments;
  std::vector<PageRecord> pages;
  std::vector<PageId> slot_table;
  std::deque<SegmentId> free_list;
  Clock clock;
  // Exact per-page update probabilities; empty unless an oracle is attached.
  std::vector<double> page_rate;

  std::span<PageId> slots(SegmentId seg) {
    return {slot_table.data() + static_cast<std::size_t>(seg) * slots_per_segment,
            slots_per_segment};
  }
  std::span<const PageId> slots(SegmentId seg) const {
    return {slot_table.data() + static_cast<std::size_t>(seg) * slots_per_segment,
            slots_per_segment};
  }

  double rate(PageId p) const { return page_rate.empty() ? 0.0 : page_rate[p]; }

  SegmentId allocate(SegmentState state) {
    if (free_list.empty()) throw CleaningLivelock("free segment list exhausted");
    const SegmentId id = free_list.front();
    free_list.pop_front();
    SegmentMeta& m = segments[id];
    m.state = state;
    m.free_bytes = segment_bytes;
    m.live = 0;
    m.fill = 0;
    m.live_rate = 0.0;
    m.log_id = -1;
    return id;
  }

  bool is_full(SegmentId seg) const {
    const SegmentMeta& m = segments[seg];
    return m.fill == slots_per_segment || m.free_bytes < config.page_size;
  }

  // Places a page into the next slot of an open segment.
  void append(SegmentId seg, PageId p) {
    SegmentMeta& m = segments[seg];
    PageRecord& rec = pages[p];
    if (m.fill >= slots_per_segment || m.free_bytes < rec.size)
      throw SimulationFault("append to full segment " + std::to_string(seg));
    slots(seg)[m.fill] = p;
    rec.segment = seg;
    rec.slot = m.fill;
    rec.buffered = false;
    ++m.fill;
    ++m.live;
    m.free_bytes -= rec.size;
    m.live_rate += rate(p);
  }

  // Seals an open segment from its live slot contents.
  void seal(SegmentId seg) {
    std::vector<PageLocation> live;
    live.reserve(slots_per_segment);
    double live_rate = 0.0;
    for (PageId p : slots(seg).first(segments[seg].fill)) {
      if (p == kDeadSlot) continue;
      const PageRecord& rec = pages[p];
      live.push_back({p, seg, rec.size, rec.u_p2, rec.last_write});
      live_rate += rate(p);
    }
    seal_segment(segments[seg], live, clock, segment_bytes);
    segments[seg].live_rate = live_rate;
  }

  // Removes every live page from a sealed segment (the pages become
  // unmapped until rewritten) and returns them in slot order.
  std::vector<PageId> evacuate(SegmentId seg) {
    SegmentMeta& m = segments[seg];
    if (m.state != SegmentState::kSealed)
      throw SimulationFault("evacuate of unsealed segment " + std::to_string(seg));
    std::vector<PageId> out;
    out.reserve(m.live);
    for (PageId& p : slots(seg).first(m.fill)) {
      if (p == kDeadSlot) continue;
      out.push_back(p);
      pages[p].segment = kNoSegment;
      p = kDeadSlot;
    }
    m.live = 0;
    m.free_bytes = segment_bytes;
    m.live_rate = 0.0;
    return out;
  }
};

// Invalidates the current on-store version of a page that is being
// rewritten: A grows by the page size, C drops by one, the slot goes dead
// and the page becomes unmapped.
inline const SegmentMeta& note_overwrite(StoreState& state, PageId page_id) {
  if (page_id >= state.pages.size())
    throw SimulationFault("overwrite of unknown page " + std::to_string(page_id));
  PageRecord& rec = state.pages[page_id];
  if (rec.segment == kNoSegment || rec.buffered)
    throw SimulationFault("overwrite of page " + std::to_string(page_id) +
                          " with no on-store location");
  SegmentMeta& m = state.segments[rec.segment];
  if (m.state == SegmentState::kFree || m.live == 0)
    throw SimulationFault("page " + std::to_string(page_id) + " maps to empty segment " +
                          std::to_string(m.id));
  auto slot = state.slots(rec.segment);
  if (rec.slot >= m.fill || slot[rec.slot] != page_id)
    throw SimulationFault("slot table disagrees with page " + std::to_string(page_id));
  slot[rec.slot] = kDeadSlot;
  m.free_bytes += rec.size;
  --m.live;
  m.live_rate = m.live == 0 ? 0.0 : std::max(0.0, m.live_rate - state.rate(page_id));
  rec.segment = kNoSegment;
  return m;
}

// Returns an emptied segment to the free list.
inline void free_segment(StoreState& state, SegmentId id) {
  if (id >= state.segments.size())
    throw SimulationFault("free of unknown segment " + std::to_string(id));
  SegmentMeta& m = state.segments[id];
  if (m.live > 0)
    throw SimulationFault("free of segment " + std::to_string(id) + " with " +
                          std::to_string(m.live) + " live pages");
  if (m.state == SegmentState::kFree)
    throw SimulationFault("double free of segment " + std::to_string(id));
  std::fill(state.slots(id).begin(), state.slots(id).end(), kDeadSlot);
  m.state = SegmentState::kFree;
  m.free_bytes = state.segment_bytes;
  m.fill = 0;
  m.live_rate = 0.0;
  m.log_id = -1;
  state.free_list.push_back(id);
}

// Cross-checks the page table, slot table and segment counters. Returns a
// description of the first violation found.
inline std::optional<std::string> verify(const StoreState& s) {
  std::vector<std::uint32_t> live(s.segments.size(), 0);
  std::vector<std::uint64_t> bytes(s.segments.size(), 0);
  for (PageId p = 0; p < s.pages.size(); ++p) {
    const PageRecord& rec = s.pages[p];
    if (rec.segment == kNoSegment) return "page " + std::to_string(p) + " unmapped";
    if (rec.segment >= s.segments.size()) return "page " + std::to_string(p) + " bad segment";
    if (!rec.buffered && s.slots(rec.segment)[rec.slot] != p)
      return "page " + std::to_string(p) + " slot mismatch";
    ++live[rec.segment];
    bytes[rec.segment] += rec.size;
    if (rec.u_p2 > s.clock.now() || rec.last_write > s.clock.now())
      return "page " + std::to_string(p) + " history ahead of clock";
  }
  for (const SegmentMeta& m : s.segments) {
    if (live[m.id] != m.live)
      return "segment " + std::to_string(m.id) + " live count " + std::to_string(m.live) +
             " but " + std::to_string(live[m.id]) + " pages map to it";
    if (m.free_bytes + bytes[m.id] != s.segment_bytes)
      return "segment " + std::to_string(m.id) + " byte accounting broken";
    if (m.state == SegmentState::kFree && (m.live != 0 || m.free_bytes != s.segment_bytes))
      return "free segment " + std::to_string(m.id) + " not empty";
    if (m.state == SegmentState::kSealed &&
        (m.u_p2 > m.u_p1 + 1e-9 || m.u_p1 > s.clock.now()))
      return "segment " + std::to_string(m.id) + " history out of order";
  }
  for (SegmentId id : s.free_list)
    if (s.segments[id].state != SegmentState::kFree)
      return "free list holds non-free segment " + std::to_string(id);
  return std::nullopt;
}

}  // namespace lsgc
