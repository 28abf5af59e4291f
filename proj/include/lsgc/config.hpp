#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "lsgc/error.hpp"

namespace lsgc {

using PageId = std::uint32_t;
using SegmentId = std::uint32_t;

inline constexpr std::uint64_t kKiB = 1024;
inline constexpr std::uint64_t kMiB = 1024 * kKiB;
inline constexpr std::uint64_t kGiB = 1024 * kMiB;

// Physical layout of the simulated store and the cleaner's knobs.
struct StoreConfig {
  std::uint64_t page_size = 4096;
  std::uint64_t segment_size = 2 * kMiB;
  std::uint64_t capacity = 2 * kGiB;
  double fill_factor = 0.8;
  // Cleaning starts when the free list drops below this many segments.
  std::uint32_t gc_trigger_free = 32;
  // Segments cleaned per cycle (multi-log always cleans one).
  std::uint32_t gc_batch = 64;
  // Each sorted write stream is staged in this many segments before sealing.
  std::uint32_t sort_buffer_segments = 16;

  std::uint32_t pages_per_segment() const {
    return static_cast<std::uint32_t>(segment_size / page_size);
  }
  std::uint32_t segment_count() const {
    return static_cast<std::uint32_t>(capacity / segment_size);
  }
  std::uint32_t logical_pages() const {
    return static_cast<std::uint32_t>(
        std::floor(fill_factor * static_cast<double>(capacity) /
                   static_cast<double>(page_size)));
  }

  // Trigger and batch rescaled so that they keep the same share of the store
  // as 32 and 64 segments of a 51200-segment (100 GB) store, at least 1.
  StoreConfig with_proportional_reserve() const {
    constexpr double kReferenceSegments = 51200.0;
    StoreConfig out = *this;
    const double ratio = static_cast<double>(segment_count()) / kReferenceSegments;
    out.gc_trigger_free = static_cast<std::uint32_t>(std::max(1.0, std::round(32.0 * ratio)));
    out.gc_batch = static_cast<std::uint32_t>(std::max(1.0, std::round(64.0 * ratio)));
    return out;
  }

  void validate() const {
    if (page_size == 0 || segment_size == 0)
      throw ConfigError("page_size and segment_size must be positive");
    if (segment_size % page_size != 0)
      throw ConfigError("segment_size must be a multiple of page_size");
    if (!(fill_factor > 0.0 && fill_factor < 1.0))
      throw ConfigError("fill_factor must lie in (0, 1)");
    const std::uint64_t segments = capacity / segment_size;
    if (segments < 2) throw ConfigError("capacity must hold at least two segments");
    if (segments > UINT32_MAX / 2 ||
        static_cast<double>(capacity) / static_cast<double>(page_size) > UINT32_MAX / 2)
      throw ConfigError("capacity too large for 32-bit page and segment ids");
    if (gc_trigger_free >= segments)
      throw ConfigError("gc_trigger_free must be below the segment count");
    if (gc_batch == 0 || gc_batch > segments - gc_trigger_free)
      throw ConfigError("gc_batch must be in [1, segment_count - gc_trigger_free]");
    if (sort_buffer_segments == 0)
      throw ConfigError("sort_buffer_segments must be at least 1");
    if (logical_pages() == 0) throw ConfigError("fill_factor leaves no logical pages");
    const std::uint64_t data_segments =
        (logical_pages() + pages_per_segment() - 1) / pages_per_segment();
    // Live data, both staging buffers and the write points must fit at once.
    if (data_segments + 2ULL * sort_buffer_segments + 2 > segments)
      throw ConfigError("fill_factor too high for capacity and sort_buffer_segments");
  }
};

// The global update counter u_now: one tick per user page write.
struct Clock {
  std::uint64_t u_now = 0;

  void tick() { ++u_now; }
  double now() const { return static_cast<double>(u_now); }
};

}  // namespace lsgc
