#include "curator/splitter/histogram.hpp"

#include <algorithm>
#include <cmath>

namespace curator::splitter {
namespace {

int bin_of(double x, double range, int bins) {
  return std::min(bins - 1, static_cast<int>(std::floor(x / range * bins)));
}

double half_l1(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

}  // namespace

HsvHistogram hsv_histogram(const frame_io::RgbImage& image, int bins) {
  if (bins < 2) throw std::invalid_argument("hsv_histogram: bins_per_channel must be >= 2");
  if (image.width <= 0 || image.height <= 0) {
    throw std::invalid_argument("hsv_histogram: empty image");
  }
  HsvHistogram hist{bins, std::vector<double>(bins), std::vector<double>(bins),
                    std::vector<double>(bins)};
  std::vector<long long> h(bins), s(bins), v(bins);
  const std::size_t pixels = static_cast<std::size_t>(image.width) * image.height;
  for (std::size_t i = 0; i < pixels; ++i) {
    const auto* px = &image.data[i * 3];
    const auto hsv = frame_io::rgb_to_hsv(px[0], px[1], px[2]);
    ++h[bin_of(hsv.h, 360.0, bins)];
    ++s[bin_of(hsv.s, 1.0, bins)];
    ++v[bin_of(hsv.v, 1.0, bins)];
  }
  const double inv = 1.0 / static_cast<double>(pixels);
  for (int b = 0; b < bins; ++b) {
    hist.hue[b] = h[b] * inv;
    hist.saturation[b] = s[b] * inv;
    hist.value[b] = v[b] * inv;
  }
  return hist;
}

double hist_distance(const HsvHistogram& a, const HsvHistogram& b) {
  if (a.bins != b.bins || a.hue.size() != b.hue.size()) {
    throw BinMismatch("hist_distance: histograms have different bin counts");
  }
  const double d = (half_l1(a.hue, b.hue) + half_l1(a.saturation, b.saturation) +
                    half_l1(a.value, b.value)) /
                   3.0;
  return std::clamp(d, 0.0, 1.0);
}

}  // namespace curator::splitter
