#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curator/dedup/embedding.hpp"

namespace curator::dedup {

class KMeansError : public std::invalid_argument {
 public:
  enum class Kind { EmptyInput, KTooLarge, BadArgument };

  KMeansError(Kind kind, const std::string& what) : std::invalid_argument(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct KMeansModel {
  int dim = 0;
  std::vector<double> centroids;      // k x dim, row-major
  std::vector<std::string> clip_ids;  // input order
  std::vector<int> assignments;       // cluster per input
  double inertia = 0.0;
  std::vector<double> inertia_history;  // after every assignment step
  std::uint64_t seed = 0;
  int iterations = 0;
  bool converged = false;

  int k() const { return dim == 0 ? 0 : static_cast<int>(centroids.size() / dim); }
  std::span<const double> centroid(int c) const {
    return {centroids.data() + static_cast<std::size_t>(c) * dim, static_cast<std::size_t>(dim)};
  }
  /// Index of the nearest centroid by squared L2, lowest index on ties.
  int nearest(std::span<const float> v) const;
};

double squared_distance(std::span<const float> v, std::span<const double> c);

/// k-means++ seeding followed by Lloyd iterations until the assignment
/// stops changing or max_iters update steps have run. Deterministic for
/// fixed inputs, k and seed; `threads` only splits the assignment step.
KMeansModel kmeans_fit(std::span<const Embedding> points, int k, int max_iters,
                       std::uint64_t seed, unsigned threads = 1);

}  // namespace curator::dedup
