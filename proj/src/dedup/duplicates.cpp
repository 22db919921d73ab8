#include "curator/dedup/duplicates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace curator::dedup {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

bool better_representative(const DedupItem& a, const DedupItem& b) {
  const long long pa = static_cast<long long>(a.width) * a.height;
  const long long pb = static_cast<long long>(b.width) * b.height;
  if (pa != pb) return pa > pb;
  return a.clip_id < b.clip_id;
}

}  // namespace

SimilarityScan scan_similarity_blocked(std::span<const DedupItem> items, double eps,
                                       std::size_t block) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("dedup: eps must be in (0, 1)");
  if (block == 0) throw std::invalid_argument("dedup: block must be positive");
  const std::size_t n = items.size();
  SimilarityScan scan;
  scan.max_similarity.assign(n, -std::numeric_limits<double>::infinity());
  scan.argmax.assign(n, -1);
  if (n == 0) return scan;

  const std::size_t dim = items.front().vector.size();
  for (const auto& it : items) {
    if (it.vector.size() != dim) throw DimensionMismatch("dedup: mixed embedding dimensions");
    if (std::abs(l2_norm(it.vector) - 1.0) > 1e-6) {
      throw UnnormalizedInput("dedup: embedding of " + it.clip_id + " is not unit length");
    }
  }

  const double threshold = 1.0 - eps;
  std::vector<double> tile(block * block);
  for (std::size_t bi = 0; bi < n; bi += block) {
    const std::size_t ie = std::min(n, bi + block);
    for (std::size_t bj = bi; bj < n; bj += block) {
      const std::size_t je = std::min(n, bj + block);
      // One tile of the upper triangle; diagonal tiles skip j <= i.
      for (std::size_t i = bi; i < ie; ++i) {
        for (std::size_t j = std::max(bj, i + 1); j < je; ++j) {
          tile[(i - bi) * block + (j - bj)] = dot(items[i].vector, items[j].vector);
        }
      }
      for (std::size_t i = bi; i < ie; ++i) {
        for (std::size_t j = std::max(bj, i + 1); j < je; ++j) {
          const double s = tile[(i - bi) * block + (j - bj)];
          if (s > scan.max_similarity[i]) {
            scan.max_similarity[i] = s;
            scan.argmax[i] = static_cast<std::ptrdiff_t>(j);
          }
          if (s > scan.max_similarity[j]) {
            scan.max_similarity[j] = s;
            scan.argmax[j] = static_cast<std::ptrdiff_t>(i);
          }
          if (s >= threshold) scan.pairs.emplace_back(i, j);
        }
      }
    }
  }
  return scan;
}

std::vector<DuplicateGroup> find_duplicates_blocked(std::span<const DedupItem> items, double eps,
                                                    std::size_t block) {
  const auto scan = scan_similarity_blocked(items, eps, block);
  DisjointSets sets(items.size());
  for (const auto& [i, j] : scan.pairs) sets.unite(i, j);

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (scan.max_similarity[i] >= 1.0 - eps) components[sets.find(i)].push_back(i);
  }
  std::vector<DuplicateGroup> groups;
  for (const auto& [root, members] : components) {
    if (members.size() < 2) continue;
    DuplicateGroup g;
    std::size_t rep = members.front();
    for (std::size_t m : members) {
      if (better_representative(items[m], items[rep])) rep = m;
      g.members.push_back(items[m].clip_id);
      g.max_similarity = std::max(g.max_similarity, scan.max_similarity[m]);
    }
    g.representative = items[rep].clip_id;
    std::sort(g.members.begin(), g.members.end());
    groups.push_back(std::move(g));
  }
  std::sort(groups.begin(), groups.end(), [](const DuplicateGroup& a, const DuplicateGroup& b) {
    return a.members.front() < b.members.front();
  });
  return groups;
}

DedupResult dedup(std::span<const DedupRecord> records, const KMeansModel& model, double eps,
                  std::size_t block) {
  std::map<std::string, int> cluster_of;
  for (std::size_t i = 0; i < model.clip_ids.size(); ++i) {
    cluster_of[model.clip_ids[i]] = model.assignments[i];
  }
  std::map<int, std::vector<DedupItem>> by_cluster;
  for (const auto& r : records) {
    if (r.embedding.empty()) throw MissingEmbedding("dedup: " + r.clip_id + " has no embedding");
    const auto it = cluster_of.find(r.clip_id);
    if (it == cluster_of.end()) {
      throw MissingEmbedding("dedup: " + r.clip_id + " has no cluster assignment");
    }
    by_cluster[it->second].push_back({r.clip_id, r.embedding, r.width, r.height});
  }

  DedupResult out;
  for (const auto& r : records) out.kept.insert(r.clip_id);
  for (const auto& [cluster, items] : by_cluster) {
    for (auto& g : find_duplicates_blocked(items, eps, block)) {
      for (const auto& id : g.members) {
        if (id == g.representative) continue;
        out.removed.insert(id);
        out.kept.erase(id);
      }
      out.groups.push_back(std::move(g));
    }
  }
  out.removal_fraction =
      records.empty() ? 0.0 : static_cast<double>(out.removed.size()) / records.size();
  return out;
}

}  // namespace curator::dedup
