#include "curator/frame_io/color.hpp"

#include <algorithm>
#include <cmath>

namespace curator::frame_io {
namespace {

std::uint8_t clamp_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) noexcept {
  const int mx = std::max({r8, g8, b8});
  const int mn = std::min({r8, g8, b8});
  const int delta = mx - mn;
  Hsv out;
  out.v = mx / 255.0;
  if (mx == 0 || delta == 0) return out;
  out.s = static_cast<double>(delta) / mx;

  double h;
  if (mx == r8) {
    h = 60.0 * static_cast<double>(g8 - b8) / delta;
  } else if (mx == g8) {
    h = 60.0 * (2.0 + static_cast<double>(b8 - r8) / delta);
  } else {
    h = 60.0 * (4.0 + static_cast<double>(r8 - g8) / delta);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

RgbImage to_rgb(const Frame& frame, const StreamHeader& header) {
  RgbImage img(header.width, header.height);
  const auto y = frame.luma(header);
  const auto cb = frame.cb(header);
  const auto cr = frame.cr(header);
  const int shift = header.chroma == Chroma::C420 ? 1 : 0;
  const int cw = header.chroma_width();
  for (int row = 0; row < header.height; ++row) {
    for (int col = 0; col < header.width; ++col) {
      const double Y = y[static_cast<std::size_t>(row) * header.width + col];
      const std::size_t ci = static_cast<std::size_t>(row >> shift) * cw + (col >> shift);
      const double Cb = cb[ci] - 128.0;
      const double Cr = cr[ci] - 128.0;
      auto* px = img.pixel(col, row);
      px[0] = clamp_byte(Y + 1.402 * Cr);
      px[1] = clamp_byte(Y - 0.344136 * Cb - 0.714136 * Cr);
      px[2] = clamp_byte(Y + 1.772 * Cb);
    }
  }
  return img;
}

Frame from_rgb(const RgbImage& image, Chroma chroma, std::int64_t pts_index) {
  StreamHeader h;
  h.width = image.width;
  h.height = image.height;
  h.fps_num = 1;
  h.chroma = chroma;
  Frame frame;
  frame.pts_index = pts_index;
  frame.data.resize(h.frame_bytes());
  auto* y = frame.data.data();
  auto* cb = y + h.luma_bytes();
  auto* cr = cb + h.chroma_plane_bytes();

  std::vector<double> cb_full(h.luma_bytes()), cr_full(h.luma_bytes());
  for (int row = 0; row < h.height; ++row) {
    for (int col = 0; col < h.width; ++col) {
      const auto* px = image.pixel(col, row);
      const double r = px[0], g = px[1], b = px[2];
      const std::size_t i = static_cast<std::size_t>(row) * h.width + col;
      y[i] = clamp_byte(0.299 * r + 0.587 * g + 0.114 * b);
      cb_full[i] = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
      cr_full[i] = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    }
  }
  if (chroma == Chroma::C444) {
    for (std::size_t i = 0; i < h.luma_bytes(); ++i) {
      cb[i] = clamp_byte(cb_full[i]);
      cr[i] = clamp_byte(cr_full[i]);
    }
    return frame;
  }
  const int cw = h.chroma_width();
  for (int row = 0; row < h.chroma_height(); ++row) {
    for (int col = 0; col < cw; ++col) {
      double sb = 0.0, sr = 0.0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const std::size_t i = static_cast<std::size_t>(2 * row + dy) * h.width + 2 * col + dx;
          sb += cb_full[i];
          sr += cr_full[i];
        }
      }
      cb[static_cast<std::size_t>(row) * cw + col] = clamp_byte(sb / 4.0);
      cr[static_cast<std::size_t>(row) * cw + col] = clamp_byte(sr / 4.0);
    }
  }
  return frame;
}

RgbImage resize_nearest(const RgbImage& image, int width, int height) {
  RgbImage out(width, height);
  for (int row = 0; row < height; ++row) {
    const int sy = static_cast<int>(static_cast<long long>(row) * image.height / height);
    for (int col = 0; col < width; ++col) {
      const int sx = static_cast<int>(static_cast<long long>(col) * image.width / width);
      std::copy_n(image.pixel(sx, sy), 3, out.pixel(col, row));
    }
  }
  return out;
}

}  // namespace curator::frame_io
