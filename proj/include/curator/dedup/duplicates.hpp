#pragma once

#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curator/dedup/kmeans.hpp"

namespace curator::dedup {

inline constexpr double kDefaultDedupEps = 0.05;
inline constexpr std::size_t kDedupBlock = 256;

class UnnormalizedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MissingEmbedding : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A clip as seen by deduplication: its embedding and its resolution.
struct DedupItem {
  std::string clip_id;
  std::span<const float> vector;
  int width = 0;
  int height = 0;
};

struct DuplicateGroup {
  std::string representative;        // largest width*height, then smallest id
  std::vector<std::string> members;  // sorted, includes the representative
  double max_similarity = 0.0;

  bool operator==(const DuplicateGroup&) const = default;
};

/// Result of the streamed upper-triangle scan over one set of items.
struct SimilarityScan {
  std::vector<double> max_similarity;  // per item, vs. any other item (-inf if alone)
  std::vector<std::ptrdiff_t> argmax;  // partner index, -1 if alone
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // i < j, sim >= 1 - eps
};

/// Visits block x block tiles of the upper triangle of the cosine-similarity
/// matrix without materializing it, keeping a per-row/column argmax and the
/// pairs at or above 1 - eps.
SimilarityScan scan_similarity_blocked(std::span<const DedupItem> items, double eps,
                                       std::size_t block = kDedupBlock);

/// Connected components of near-duplicate pairs (union-find), one group per
/// component with at least two members. Vectors must be unit length.
std::vector<DuplicateGroup> find_duplicates_blocked(std::span<const DedupItem> items, double eps,
                                                    std::size_t block = kDedupBlock);

struct DedupRecord {
  std::string clip_id;
  std::vector<float> embedding;
  int width = 0;
  int height = 0;
};

struct DedupResult {
  std::set<std::string> kept;
  std::set<std::string> removed;
  double removal_fraction = 0.0;
  std::vector<DuplicateGroup> groups;
};

/// Within-cluster duplicate removal: every non-representative member of a
/// duplicate group is removed.
DedupResult dedup(std::span<const DedupRecord> records, const KMeansModel& model,
                  double eps = kDefaultDedupEps, std::size_t block = kDedupBlock);

}  // namespace curator::dedup
