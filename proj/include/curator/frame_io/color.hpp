#pragma once

#include <cstdint>
#include <vector>

#include "curator/frame_io/y4m.hpp"

namespace curator::frame_io {

struct Hsv {
  double h = 0.0;  // degrees, [0, 360)
  double s = 0.0;  // [0, 1]
  double v = 0.0;  // [0, 1]
};

/// Hexcone RGB -> HSV. Achromatic pixels get hue 0.
Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

/// Interleaved 8-bit RGB image.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width * height * 3

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3) {}

  std::uint8_t* pixel(int x, int y) { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* pixel(int x, int y) const {
    return &data[(static_cast<std::size_t>(y) * width + x) * 3];
  }
};

/// Full-range BT.601 (JFIF) YCbCr -> RGB, chroma upsampled by replication.
RgbImage to_rgb(const Frame& frame, const StreamHeader& header);

/// Full-range BT.601 RGB -> YCbCr frame; 4:2:0 chroma is the 2x2 box average.
Frame from_rgb(const RgbImage& image, Chroma chroma, std::int64_t pts_index = 0);

/// Nearest-neighbour resample.
RgbImage resize_nearest(const RgbImage& image, int width, int height);

}  // namespace curator::frame_io
