#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curator/dedup/kmeans.hpp"

namespace curator::dedup {

struct SearchHit {
  std::string clip_id;
  double similarity = 0.0;

  bool operator==(const SearchHit&) const = default;
};

class IndexFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cluster-shortlist cosine search over a fixed embedding set: the query is
/// ranked exactly against the members of its n_probe nearest centroids.
class SearchIndex {
 public:
  static constexpr std::uint8_t kFormatVersion = 1;

  SearchIndex() = default;
  /// Embeddings must be the ones the model was fit on, in any order.
  SearchIndex(std::span<const Embedding> embeddings, const KMeansModel& model);

  int dim() const { return dim_; }
  int k() const { return k_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& clip_ids() const { return ids_; }
  std::span<const float> vector(std::size_t i) const {
    return {vectors_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  const std::vector<std::uint32_t>& cluster_counts() const { return counts_; }
  std::uint32_t cluster_of(std::size_t i) const { return assignments_[i]; }

  /// Descending similarity, ties by clip id.
  std::vector<SearchHit> search(std::span<const float> query, std::size_t top_k,
                                int n_probe) const;

  /// Little-endian binary: magic "CVIX", version byte, 3 pad bytes,
  /// u32 dim, u32 k, u32 n, u32 counts[k], f32 centroids[k*dim],
  /// u32 assignments[n], f32 vectors[n*dim], then n x (u32 len, id bytes).
  void save(const std::string& path) const;
  static SearchIndex load(const std::string& path);

 private:
  int dim_ = 0;
  int k_ = 0;
  std::vector<float> centroids_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> assignments_;
  std::vector<float> vectors_;
  std::vector<std::string> ids_;
  std::vector<std::vector<std::uint32_t>> lists_;

  void rebuild_lists();
};

}  // namespace curator::dedup
