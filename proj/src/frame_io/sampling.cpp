#include "curator/frame_io/sampling.hpp"

#include <algorithm>
#include <stdexcept>

namespace curator::frame_io {

std::vector<std::int64_t> sample_uniform_frames(std::int64_t clip_len, std::int64_t count) {
  if (clip_len < 1 || count < 1) {
    throw std::invalid_argument("sample_uniform_frames: clip_len and count must be >= 1");
  }
  const std::int64_t n = std::min(count, clip_len);
  if (n == 1) return {0};
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(n));
  const std::int64_t span = clip_len - 1;
  const std::int64_t steps = n - 1;
  for (std::int64_t i = 0; i < n; ++i) {
    // floor(i*span/steps + 1/2) in exact integer arithmetic
    out.push_back((2 * i * span + steps) / (2 * steps));
  }
  return out;
}

}  // namespace curator::frame_io
