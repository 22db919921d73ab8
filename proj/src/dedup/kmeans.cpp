#include "curator/dedup/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <thread>

#include "curator/common/hash.hpp"

namespace curator::dedup {
namespace {

template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  if (threads <= 1 || n < 1024) {
    body(0, n);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) {
    const std::size_t lo = std::min(n, t * chunk), hi = std::min(n, lo + chunk);
    if (lo < hi) pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  body(0, std::min(n, chunk));
}

}  // namespace

double squared_distance(std::span<const float> v, std::span<const double> c) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = static_cast<double>(v[i]) - c[i];
    s += d * d;
  }
  return s;
}

int KMeansModel::nearest(std::span<const float> v) const {
  if (static_cast<int>(v.size()) != dim) throw DimensionMismatch("kmeans: query dimension mismatch");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < k(); ++c) {
    const double d = squared_distance(v, centroid(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

KMeansModel kmeans_fit(std::span<const Embedding> points, int k, int max_iters,
                       std::uint64_t seed, unsigned threads) {
  if (points.empty()) throw KMeansError(KMeansError::Kind::EmptyInput, "kmeans: no points");
  if (k < 1) throw KMeansError(KMeansError::Kind::BadArgument, "kmeans: k must be >= 1");
  if (static_cast<std::size_t>(k) > points.size()) {
    throw KMeansError(KMeansError::Kind::KTooLarge,
                      "kmeans: k=" + std::to_string(k) + " exceeds " +
                          std::to_string(points.size()) + " points");
  }
  if (max_iters < 0) throw KMeansError(KMeansError::Kind::BadArgument, "kmeans: max_iters < 0");
  const std::size_t n = points.size();
  const int dim = static_cast<int>(points.front().dim());
  for (const auto& p : points) {
    if (static_cast<int>(p.dim()) != dim) throw DimensionMismatch("kmeans: mixed dimensions");
  }

  KMeansModel m;
  m.dim = dim;
  m.seed = seed;
  m.centroids.reserve(static_cast<std::size_t>(k) * dim);
  for (const auto& p : points) m.clip_ids.push_back(p.clip_id);

  // k-means++ seeding.
  std::mt19937_64 rng(seed);
  std::vector<char> chosen(n, 0);
  auto add_centroid = [&](std::size_t i) {
    chosen[i] = 1;
    for (float x : points[i].vector) m.centroids.push_back(x);
  };
  add_centroid(uniform_index(rng, n));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i].vector, m.centroid(0));
  while (m.k() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = unit_uniform(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] == 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    } else {
      // Fewer distinct points than k: take the next unused point.
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), 0) - chosen.begin());
    }
    add_centroid(pick);
    const int c = m.k() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i].vector, m.centroid(c)));
    }
  }

  m.assignments.assign(n, -1);
  std::vector<double> dist(n);
  auto assign = [&]() -> bool {
    std::vector<char> changed(n, 0);
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        const int c = m.nearest(points[i].vector);
        dist[i] = squared_distance(points[i].vector, m.centroid(c));
        if (c != m.assignments[i]) {
          m.assignments[i] = c;
          changed[i] = 1;
        }
      }
    });
    double inertia = 0.0;
    for (double d : dist) inertia += d;
    m.inertia = inertia;
    m.inertia_history.push_back(inertia);
    return std::any_of(changed.begin(), changed.end(), [](char c) { return c != 0; });
  };

  assign();
  for (int iter = 0; iter < max_iters; ++iter) {
    // Sequential reduction in input order keeps centroids bit-stable.
    std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = m.assignments[i];
      ++counts[c];
      double* s = &sums[static_cast<std::size_t>(c) * dim];
      for (int d = 0; d < dim; ++d) s[d] += points[i].vector[d];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (int d = 0; d < dim; ++d) {
        m.centroids[static_cast<std::size_t>(c) * dim + d] =
            sums[static_cast<std::size_t>(c) * dim + d] / static_cast<double>(counts[c]);
      }
    }
    ++m.iterations;
    if (!assign()) {
      m.converged = true;
      break;
    }
  }
  return m;
}

}  // namespace curator::dedup
