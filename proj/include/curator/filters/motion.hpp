#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curator/filters/verdict.hpp"
#include "curator/frame_io/y4m.hpp"

namespace curator::filters {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-block motion of frame_a's content into frame_b, in pixels.
struct FlowField {
  int width = 0;
  int height = 0;
  int block = 16;
  int cols = 0;  // ceil(width / block)
  int rows = 0;  // ceil(height / block)
  std::vector<double> dx;
  std::vector<double> dy;
  std::vector<double> confidence;  // 1 - best_sad / worst_sad

  std::size_t size() const { return dx.size(); }
  /// Pixel centre of block i (clipped blocks use their clipped extent).
  double center_x(std::size_t i) const;
  double center_y(std::size_t i) const;

  static FlowField uniform(int width, int height, int block, double dx, double dy,
                           double confidence = 1.0);
};

/// Exhaustive block matching on 8-bit luma planes: for each block of `a`,
/// the displacement within +-search_radius minimizing the sum of absolute
/// differences against `b`. Candidates must keep the block inside the frame.
/// Ties go to the smallest |dx|+|dy|, then smallest dx, then smallest dy.
FlowField estimate_flow_block(std::span<const std::uint8_t> luma_a,
                              std::span<const std::uint8_t> luma_b, int width, int height,
                              int block = 16, int search_radius = 8);

FlowField estimate_flow_block(const frame_io::Frame& a, const frame_io::Frame& b,
                              const frame_io::StreamHeader& header, int block = 16,
                              int search_radius = 8);

struct MotionStats {
  double mean_magnitude = 0.0;  // px/frame over confident blocks
  double mean_dx = 0.0;
  double mean_dy = 0.0;
  double angular_coherence = 0.0;  // |sum of unit vectors| / moving blocks
  double temporal_variance = 0.0;  // population variance of per-field mean magnitude
  double radial_fraction = 0.0;    // share of moving blocks pointing consistently in or out
  std::size_t confident_blocks = 0;
  std::size_t moving_blocks = 0;
};

MotionStats motion_stats(std::span<const FlowField> fields, double confidence_floor = 0.1);

struct MotionThresholds {
  double static_magnitude = 0.3;  // px/frame
  double coherence_pan = 0.7;
  double shaky_variance = 4.0;
  double shaky_coherence = 0.3;
  double zoom_fraction = 0.7;
};

/// Static and shaky clips fail; passing clips are tagged pan / tilt / zoom.
FilterVerdict classify_motion(const MotionStats& stats, const MotionThresholds& thresholds = {},
                              const std::string& clip_id = {});

}  // namespace curator::filters
