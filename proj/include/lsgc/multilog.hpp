#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "lsgc/model.hpp"

namespace lsgc {

// One log of the multi-log baseline: a frequency band range, a write point
// and its sealed segments in seal order.
struct Log {
  int id = 0;
  int lo_band = 0;
  int hi_band = 0;
  SegmentId open = kNoSegment;
  std::deque<SegmentId> sealed;
  std::uint64_t live_pages = 0;
};

// Partition of pages into logs of similar update frequency. Frequencies
// are normalized so that a page receiving an average share of updates has
// frequency 1; bands are factor-of-two wide and band b covers [2^b, 2^(b+1)).
class LogSet {
 public:
  static constexpr int kMinBand = -64;
  static constexpr int kMaxBand = 64;

  static int band_of(double normalized_frequency) {
    if (!(normalized_frequency > 0.0)) return kMinBand;
    const int b = static_cast<int>(std::floor(std::log2(normalized_frequency)));
    return std::clamp(b, kMinBand, kMaxBand);
  }

  // Log covering the band of `normalized_frequency`; a page outside every
  // band opens a new log for its band.
  int route(double normalized_frequency) {
    const int band = band_of(normalized_frequency);
    for (int id : order_) {
      const Log& l = logs_.at(id);
      if (band >= l.lo_band && band <= l.hi_band) return id;
    }
    const int id = next_id_++;
    Log fresh;
    fresh.id = id;
    fresh.lo_band = band;
    fresh.hi_band = band;
    logs_.emplace(id, std::move(fresh));
    order_.insert(std::upper_bound(order_.begin(), order_.end(), id,
                                   [this](int a, int b) {
                                     return logs_.at(a).lo_band < logs_.at(b).lo_band;
                                   }),
                  id);
    return id;
  }

  Log& log(int id) { return logs_.at(id); }
  const Log& log(int id) const { return logs_.at(id); }
  std::size_t size() const { return logs_.size(); }
  // Log ids in ascending band order.
  const std::vector<int>& order() const { return order_; }

  // `id` and its frequency-adjacent logs.
  std::vector<int> neighborhood(int id) const {
    const auto it = std::find(order_.begin(), order_.end(), id);
    std::vector<int> out;
    if (it == order_.end()) return out;
    if (it != order_.begin()) out.push_back(*(it - 1));
    out.push_back(id);
    if (it + 1 != order_.end()) out.push_back(*(it + 1));
    return out;
  }

  // Among the pressured log and its neighbours, the oldest sealed segment
  // of the log whose oldest segment is emptiest. Ties go to the lower log
  // id, then the older seal. Falls back to all logs when the neighbourhood
  // has nothing sealed.
  std::optional<SegmentId> select_victim(int pressured, const StoreState& store) const {
    auto best_of = [&](const std::vector<int>& ids) -> std::optional<SegmentId> {
      std::optional<SegmentId> best;
      int best_log = 0;
      for (int id : ids) {
        const Log& l = logs_.at(id);
        if (l.sealed.empty()) continue;
        const SegmentMeta& cand = store.segments[l.sealed.front()];
        if (!best) {
          best = cand.id;
          best_log = id;
          continue;
        }
        const SegmentMeta& cur = store.segments[*best];
        if (cand.free_bytes != cur.free_bytes) {
          if (cand.free_bytes > cur.free_bytes) {
            best = cand.id;
            best_log = id;
          }
          continue;
        }
        if (id < best_log || (id == best_log && cand.sealed_at < cur.sealed_at)) {
          best = cand.id;
          best_log = id;
        }
      }
      return best;
    };
    std::vector<int> hood = neighborhood(pressured);
    std::sort(hood.begin(), hood.end());
    // A neighbourhood whose oldest segments are all full cannot relieve the
    // pressure, so it widens the same way an empty one does.
    const auto local = best_of(hood);
    if (local && store.segments[*local].free_bytes > 0) return local;
    std::vector<int> all(order_);
    std::sort(all.begin(), all.end());
    const auto global = best_of(all);
    if (!global || store.segments[*global].free_bytes > 0) return global ? global : local;
    // Every log's oldest segment is full: take the emptiest sealed segment
    // anywhere so the store cannot wedge on full heads.
    std::optional<SegmentId> emptiest;
    for (int id : all)
      for (SegmentId seg : logs_.at(id).sealed)
        if (store.segments[seg].free_bytes > 0 &&
            (!emptiest || store.segments[seg].free_bytes > store.segments[*emptiest].free_bytes ||
             (store.segments[seg].free_bytes == store.segments[*emptiest].free_bytes &&
              seg < *emptiest)))
          emptiest = seg;
    return emptiest ? emptiest : global;
  }

  void push_sealed(int id, SegmentId seg) { logs_.at(id).sealed.push_back(seg); }

  void remove_sealed(int id, SegmentId seg) {
    auto& q = logs_.at(id).sealed;
    if (!q.empty() && q.front() == seg) {
      q.pop_front();
      return;
    }
    q.erase(std::remove(q.begin(), q.end(), seg), q.end());
  }

  // First adjacent pair (in band order) that both hold fewer than one
  // segment of live pages.
  std::optional<std::pair<int, int>> find_mergeable(std::uint32_t pages_per_segment) const {
    for (std::size_t i = 0; i + 1 < order_.size(); ++i) {
      const Log& a = logs_.at(order_[i]);
      const Log& b = logs_.at(order_[i + 1]);
      if (a.live_pages < pages_per_segment && b.live_pages < pages_per_segment)
        return std::make_pair(a.id, b.id);
    }
    return std::nullopt;
  }

  // Folds `absorb` into `keep`. The caller must have sealed or emptied the
  // absorbed log's write point. Sealed segments are interleaved by seal
  // time and relabelled.
  void merge(int keep, int absorb, StoreState& store) {
    Log& k = logs_.at(keep);
    Log& a = logs_.at(absorb);
    std::deque<SegmentId> merged;
    auto older = [&](SegmentId x, SegmentId y) {
      const auto& mx = store.segments[x];
      const auto& my = store.segments[y];
      return mx.sealed_at != my.sealed_at ? mx.sealed_at < my.sealed_at : x < y;
    };
    std::merge(k.sealed.begin(), k.sealed.end(), a.sealed.begin(), a.sealed.end(),
               std::back_inserter(merged), older);
    for (SegmentId s : a.sealed) store.segments[s].log_id = keep;
    k.sealed = std::move(merged);
    k.lo_band = std::min(k.lo_band, a.lo_band);
    k.hi_band = std::max(k.hi_band, a.hi_band);
    k.live_pages += a.live_pages;
    logs_.erase(absorb);
    order_.erase(std::find(order_.begin(), order_.end(), absorb));
  }

 private:
  std::map<int, Log> logs_;
  std::vector<int> order_;
  int next_id_ = 0;
};

}  // namespace lsgc
