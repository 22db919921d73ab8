#pragma once

#include <span>
#include <string>
#include <vector>

namespace curator::filters {

struct ScoredClip {
  std::string clip_id;
  double score = 0.0;
};

struct PercentileCutResult {
  double threshold;                  // score of the last removed clip, -inf if none
  std::vector<std::string> removed;  // ascending (score, clip_id)
};

/// Removes exactly floor(fraction * N) lowest-scoring clips, ties broken by
/// clip_id. fraction in [0, 1).
PercentileCutResult percentile_cut(std::span<const ScoredClip> clips, double fraction = 0.15);

inline constexpr double kDefaultAestheticThreshold = 3.5;

/// Inclusive: a score equal to the threshold passes.
bool aesthetic_gate(double score, double threshold = kDefaultAestheticThreshold);

}  // namespace curator::filters
