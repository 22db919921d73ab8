#pragma once

#include <stdexcept>
#include <vector>

#include "curator/frame_io/color.hpp"

namespace curator::splitter {

/// Normalized per-channel HSV histograms of one frame.
struct HsvHistogram {
  int bins = 0;
  std::vector<double> hue;         // over [0, 360)
  std::vector<double> saturation;  // over [0, 1]
  std::vector<double> value;       // over [0, 1]
};

class BinMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// bins_per_channel >= 2. Each channel sums to 1.
HsvHistogram hsv_histogram(const frame_io::RgbImage& image, int bins_per_channel);

/// Mean over the three channels of half the L1 distance between the
/// normalized histograms. In [0, 1], symmetric, zero iff identical.
double hist_distance(const HsvHistogram& a, const HsvHistogram& b);

}  // namespace curator::splitter
