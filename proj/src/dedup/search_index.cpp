#include "curator/dedup/search_index.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>

namespace curator::dedup {
namespace {

constexpr char kMagic[4] = {'C', 'V', 'I', 'X'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IndexFormatError("index: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }

double centroid_distance(std::span<const float> q, const float* c, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = static_cast<double>(q[i]) - c[i];
    s += d * d;
  }
  return s;
}

}  // namespace

SearchIndex::SearchIndex(std::span<const Embedding> embeddings, const KMeansModel& model)
    : dim_(model.dim), k_(model.k()) {
  std::map<std::string, int> cluster_of;
  for (std::size_t i = 0; i < model.clip_ids.size(); ++i) {
    cluster_of[model.clip_ids[i]] = model.assignments[i];
  }
  centroids_.assign(model.centroids.begin(), model.centroids.end());
  counts_.assign(k_, 0);
  for (const auto& e : embeddings) {
    if (static_cast<int>(e.dim()) != dim_) throw DimensionMismatch("index: dimension mismatch");
    const auto it = cluster_of.find(e.clip_id);
    if (it == cluster_of.end()) {
      throw std::invalid_argument("index: " + e.clip_id + " is not in the clustering");
    }
    ids_.push_back(e.clip_id);
    assignments_.push_back(static_cast<std::uint32_t>(it->second));
    ++counts_[it->second];
    vectors_.insert(vectors_.end(), e.vector.begin(), e.vector.end());
  }
  rebuild_lists();
}

void SearchIndex::rebuild_lists() {
  lists_.assign(k_, {});
  for (std::size_t i = 0; i < assignments_.size(); ++i) {
    lists_[assignments_[i]].push_back(static_cast<std::uint32_t>(i));
  }
}

std::vector<SearchHit> SearchIndex::search(std::span<const float> query, std::size_t top_k,
                                           int n_probe) const {
  if (static_cast<int>(query.size()) != dim_) {
    throw DimensionMismatch("search: query has " + std::to_string(query.size()) +
                            " dims, index has " + std::to_string(dim_));
  }
  if (n_probe < 1 || n_probe > k_) throw std::invalid_argument("search: n_probe must be in [1, k]");

  std::vector<float> q(query.begin(), query.end());
  if (!normalize(q)) return {};

  std::vector<std::pair<double, int>> by_distance;
  for (int c = 0; c < k_; ++c) {
    by_distance.emplace_back(centroid_distance(q, &centroids_[static_cast<std::size_t>(c) * dim_], dim_), c);
  }
  std::partial_sort(by_distance.begin(), by_distance.begin() + n_probe, by_distance.end());

  std::vector<SearchHit> hits;
  for (int p = 0; p < n_probe; ++p) {
    for (std::uint32_t i : lists_[by_distance[p].second]) {
      hits.push_back({ids_[i], cosine_similarity(q, vector(i))});
    }
  }
  const std::size_t keep = std::min(top_k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + keep, hits.end(),
                    [](const SearchHit& a, const SearchHit& b) {
                      if (a.similarity != b.similarity) return a.similarity > b.similarity;
                      return a.clip_id < b.clip_id;
                    });
  hits.resize(keep);
  return hits;
}

void SearchIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create index " + path);
  out.write(kMagic, 4);
  const char version_and_pad[4] = {static_cast<char>(kFormatVersion), 0, 0, 0};
  out.write(version_and_pad, 4);
  put_u32(out, static_cast<std::uint32_t>(dim_));
  put_u32(out, static_cast<std::uint32_t>(k_));
  put_u32(out, static_cast<std::uint32_t>(ids_.size()));
  for (auto c : counts_) put_u32(out, c);
  for (float f : centroids_) put_f32(out, f);
  for (auto a : assignments_) put_u32(out, a);
  for (float f : vectors_) put_f32(out, f);
  for (const auto& id : ids_) {
    put_u32(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

SearchIndex SearchIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open index " + path);
  char magic[4];
  char version[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IndexFormatError("index: bad magic in " + path);
  }
  if (!in.read(version, 4) || static_cast<std::uint8_t>(version[0]) != kFormatVersion) {
    throw IndexFormatError("index: unsupported version in " + path);
  }
  SearchIndex idx;
  idx.dim_ = static_cast<int>(get_u32(in));
  idx.k_ = static_cast<int>(get_u32(in));
  const std::uint32_t n = get_u32(in);
  if (idx.dim_ <= 0 || idx.k_ <= 0) throw IndexFormatError("index: bad dimensions");
  idx.counts_.resize(idx.k_);
  for (auto& c : idx.counts_) c = get_u32(in);
  idx.centroids_.resize(static_cast<std::size_t>(idx.k_) * idx.dim_);
  for (auto& f : idx.centroids_) f = get_f32(in);
  idx.assignments_.resize(n);
  for (auto& a : idx.assignments_) {
    a = get_u32(in);
    if (a >= static_cast<std::uint32_t>(idx.k_)) throw IndexFormatError("index: bad assignment");
  }
  idx.vectors_.resize(static_cast<std::size_t>(n) * idx.dim_);
  for (auto& f : idx.vectors_) f = get_f32(in);
  idx.ids_.resize(n);
  for (auto& id : idx.ids_) {
    const std::uint32_t len = get_u32(in);
    if (len > (1u << 20)) throw IndexFormatError("index: clip id too long");
    id.resize(len);
    if (!in.read(id.data(), len)) throw IndexFormatError("index: truncated clip id");
  }
  std::vector<std::uint32_t> recount(idx.k_, 0);
  for (auto a : idx.assignments_) ++recount[a];
  if (recount != idx.counts_) throw IndexFormatError("index: cluster counts disagree");
  idx.rebuild_lists();
  return idx;
}

}  // namespace curator::dedup
