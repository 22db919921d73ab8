#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace curator::splitter {

struct Clip {
  std::string source_id;
  std::int64_t start_frame = 0;  // inclusive
  std::int64_t end_frame = 0;    // exclusive
  int fps_num = 30;
  int fps_den = 1;

  std::int64_t frames() const { return end_frame - start_frame; }
  double duration_seconds() const {
    return static_cast<double>(frames()) * fps_den / fps_num;
  }
  bool operator==(const Clip&) const = default;
};

struct ClipRules {
  double min_seconds = 2.0;   // shorter segments are discarded
  double max_seconds = 60.0;  // longer segments are split evenly
};

/// Cuts [0, stream_len) at `boundaries` (sorted, each in (0, stream_len)),
/// drops segments shorter than min_seconds and splits segments longer than
/// max_seconds into ceil(d / max) near-equal parts.
std::vector<Clip> apply_clip_rules(std::span<const std::int64_t> boundaries,
                                   std::int64_t stream_len, int fps_num, int fps_den,
                                   const std::string& source_id, const ClipRules& rules = {});

}  // namespace curator::splitter
