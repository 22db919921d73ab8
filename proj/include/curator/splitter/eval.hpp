#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace curator::splitter {

struct SplitEvalResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

/// Transition frame for a ranged shot annotation: floor((start + end) / 2).
std::int64_t range_to_midpoint(std::int64_t start, std::int64_t end);

/// One-to-one matching of predicted to ground-truth boundaries within
/// +-tolerance frames. Ground truth is visited in ascending order and takes
/// the earliest unmatched prediction inside its window, which yields a
/// maximum-cardinality matching for equal-width windows on a line.
SplitEvalResult eval_split(std::span<const std::int64_t> pred, std::span<const std::int64_t> gt,
                           std::int64_t tolerance);

/// Line-delimited JSON, each line {"frame": n} or {"start": a, "end": b}.
/// Blank lines are ignored; returns the sorted transition frames.
std::vector<std::int64_t> load_boundary_file(const std::string& path);

}  // namespace curator::splitter
