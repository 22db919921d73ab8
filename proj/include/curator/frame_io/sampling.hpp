#pragma once

#include <cstdint>
#include <vector>

namespace curator::frame_io {

/// min(count, clip_len) strictly increasing indices spread evenly over
/// [0, clip_len - 1], endpoints included: index_i = round(i * (N-1) / (n-1)),
/// rounding halves up. Both arguments must be >= 1.
std::vector<std::int64_t> sample_uniform_frames(std::int64_t clip_len, std::int64_t count);

}  // namespace curator::frame_io
