#include "curator/filters/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace curator::filters {

PercentileCutResult percentile_cut(std::span<const ScoredClip> clips, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("percentile_cut: fraction must be in [0, 1)");
  }
  std::vector<const ScoredClip*> order;
  order.reserve(clips.size());
  for (const auto& c : clips) {
    if (!std::isfinite(c.score)) throw std::invalid_argument("percentile_cut: non-finite score");
    order.push_back(&c);
  }
  const auto count = static_cast<std::size_t>(std::floor(fraction * clips.size()));
  std::partial_sort(order.begin(), order.begin() + count, order.end(),
                    [](const ScoredClip* a, const ScoredClip* b) {
                      if (a->score != b->score) return a->score < b->score;
                      return a->clip_id < b->clip_id;
                    });
  PercentileCutResult out{-std::numeric_limits<double>::infinity(), {}};
  out.removed.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.removed.push_back(order[i]->clip_id);
  if (count > 0) out.threshold = order[count - 1]->score;
  return out;
}

bool aesthetic_gate(double score, double threshold) {
  if (!std::isfinite(score)) throw std::invalid_argument("aesthetic_gate: non-finite score");
  return score >= threshold;
}

}  // namespace curator::filters
