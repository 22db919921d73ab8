#include "curator/splitter/clip_rules.hpp"

#include <cmath>
#include <stdexcept>

namespace curator::splitter {
namespace {

// frames * den compared against seconds * num; both sides are exact in
// double for any realistic frame count and rate.
bool shorter_than(std::int64_t frames, double seconds, int num, int den) {
  return static_cast<double>(frames) * den < seconds * num;
}

bool longer_than(std::int64_t frames, double seconds, int num, int den) {
  return static_cast<double>(frames) * den > seconds * num;
}

}  // namespace

std::vector<Clip> apply_clip_rules(std::span<const std::int64_t> boundaries,
                                   std::int64_t stream_len, int fps_num, int fps_den,
                                   const std::string& source_id, const ClipRules& rules) {
  if (fps_num <= 0 || fps_den <= 0) throw std::invalid_argument("apply_clip_rules: bad fps");
  if (rules.min_seconds <= 0 || rules.max_seconds < 2 * rules.min_seconds) {
    throw std::invalid_argument("apply_clip_rules: max_seconds must be >= 2 * min_seconds");
  }
  std::vector<std::int64_t> cuts{0};
  for (std::int64_t b : boundaries) {
    if (b <= cuts.back() || b >= stream_len) {
      throw std::invalid_argument("apply_clip_rules: boundaries must be sorted and inside the stream");
    }
    cuts.push_back(b);
  }
  cuts.push_back(stream_len);

  std::vector<Clip> clips;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const std::int64_t start = cuts[i];
    const std::int64_t frames = cuts[i + 1] - start;
    if (frames <= 0 || shorter_than(frames, rules.min_seconds, fps_num, fps_den)) continue;
    if (!longer_than(frames, rules.max_seconds, fps_num, fps_den)) {
      clips.push_back({source_id, start, start + frames, fps_num, fps_den});
      continue;
    }
    auto parts = static_cast<std::int64_t>(
        std::ceil(static_cast<double>(frames) * fps_den / (rules.max_seconds * fps_num)));
    // Rounding a part up to whole frames can push it over the cap at
    // non-integer frame rates.
    while (longer_than((frames + parts - 1) / parts, rules.max_seconds, fps_num, fps_den)) ++parts;
    const std::int64_t base = frames / parts;
    const std::int64_t extra = frames % parts;
    std::int64_t pos = start;
    for (std::int64_t p = 0; p < parts; ++p) {
      const std::int64_t len = base + (p < extra ? 1 : 0);
      clips.push_back({source_id, pos, pos + len, fps_num, fps_den});
      pos += len;
    }
  }
  return clips;
}

}  // namespace curator::splitter
