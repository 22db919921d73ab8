#include "curator/filters/motion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace curator::filters {

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::None: return "none";
    case RejectReason::Static: return "static";
    case RejectReason::Shaky: return "shaky";
    case RejectReason::LowQuality: return "low_quality";
    case RejectReason::LowAesthetic: return "low_aesthetic";
    case RejectReason::TextOverlay: return "text_overlay";
    case RejectReason::ExcludedType: return "excluded_type";
    case RejectReason::Resampled: return "resampled_out";
  }
  return "unknown";
}

double FlowField::center_x(std::size_t i) const {
  const int bx = static_cast<int>(i % cols) * block;
  const int bw = std::min(block, width - bx);
  return bx + bw / 2.0;
}

double FlowField::center_y(std::size_t i) const {
  const int by = static_cast<int>(i / cols) * block;
  const int bh = std::min(block, height - by);
  return by + bh / 2.0;
}

FlowField FlowField::uniform(int width, int height, int block, double dx, double dy,
                             double confidence) {
  FlowField f;
  f.width = width;
  f.height = height;
  f.block = block;
  f.cols = (width + block - 1) / block;
  f.rows = (height + block - 1) / block;
  const std::size_t n = static_cast<std::size_t>(f.cols) * f.rows;
  f.dx.assign(n, dx);
  f.dy.assign(n, dy);
  f.confidence.assign(n, confidence);
  return f;
}

FlowField estimate_flow_block(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                              int width, int height, int block, int radius) {
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  if (a.size() != plane || b.size() != plane) {
    throw DimensionMismatch("estimate_flow_block: luma planes do not match " +
                            std::to_string(width) + "x" + std::to_string(height));
  }
  if (block < 1 || radius < 0) throw std::invalid_argument("estimate_flow_block: bad block/radius");

  FlowField f = FlowField::uniform(width, height, block, 0.0, 0.0, 0.0);
  for (int by = 0; by < f.rows; ++by) {
    for (int bx = 0; bx < f.cols; ++bx) {
      const int x0 = bx * block;
      const int y0 = by * block;
      const int bw = std::min(block, width - x0);
      const int bh = std::min(block, height - y0);

      long best_sad = std::numeric_limits<long>::max();
      long worst_sad = 0;
      int best_dx = 0, best_dy = 0;
      for (int dx = -radius; dx <= radius; ++dx) {
        if (x0 + dx < 0 || x0 + dx + bw > width) continue;
        for (int dy = -radius; dy <= radius; ++dy) {
          if (y0 + dy < 0 || y0 + dy + bh > height) continue;
          long sad = 0;
          for (int y = 0; y < bh; ++y) {
            const std::uint8_t* pa = &a[static_cast<std::size_t>(y0 + y) * width + x0];
            const std::uint8_t* pb = &b[static_cast<std::size_t>(y0 + y + dy) * width + x0 + dx];
            for (int x = 0; x < bw; ++x) sad += std::abs(int(pa[x]) - int(pb[x]));
          }
          worst_sad = std::max(worst_sad, sad);
          const int cost = std::abs(dx) + std::abs(dy);
          const int best_cost = std::abs(best_dx) + std::abs(best_dy);
          // Scan order is dx-major ascending, so the first of equal cost wins
          // the lexicographic tie-break.
          if (sad < best_sad || (sad == best_sad && cost < best_cost)) {
            best_sad = sad;
            best_dx = dx;
            best_dy = dy;
          }
        }
      }
      const std::size_t i = static_cast<std::size_t>(by) * f.cols + bx;
      f.dx[i] = best_dx;
      f.dy[i] = best_dy;
      f.confidence[i] = worst_sad > 0 ? 1.0 - static_cast<double>(best_sad) / worst_sad : 0.0;
    }
  }
  return f;
}

FlowField estimate_flow_block(const frame_io::Frame& a, const frame_io::Frame& b,
                              const frame_io::StreamHeader& header, int block, int radius) {
  return estimate_flow_block(a.luma(header), b.luma(header), header.width, header.height, block,
                             radius);
}

MotionStats motion_stats(std::span<const FlowField> fields, double confidence_floor) {
  if (fields.empty()) throw std::invalid_argument("motion_stats: need at least one flow field");
  MotionStats s;
  double sum_mag = 0.0, sum_dx = 0.0, sum_dy = 0.0;
  double unit_x = 0.0, unit_y = 0.0;
  std::size_t outward = 0, inward = 0, radial_counted = 0;
  std::vector<double> per_field;

  for (const auto& f : fields) {
    double field_mag = 0.0;
    std::size_t field_n = 0;
    const double cx = f.width / 2.0, cy = f.height / 2.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f.confidence[i] < confidence_floor) continue;
      const double vx = f.dx[i], vy = f.dy[i];
      const double mag = std::hypot(vx, vy);
      ++s.confident_blocks;
      ++field_n;
      field_mag += mag;
      sum_mag += mag;
      sum_dx += vx;
      sum_dy += vy;
      if (mag == 0.0) continue;
      ++s.moving_blocks;
      unit_x += vx / mag;
      unit_y += vy / mag;
      const double rx = f.center_x(i) - cx, ry = f.center_y(i) - cy;
      if (rx == 0.0 && ry == 0.0) continue;
      ++radial_counted;
      const double dot = vx * rx + vy * ry;
      if (dot > 0.0) ++outward;
      if (dot < 0.0) ++inward;
    }
    if (field_n > 0) per_field.push_back(field_mag / field_n);
  }

  if (s.confident_blocks > 0) {
    const double n = static_cast<double>(s.confident_blocks);
    s.mean_magnitude = sum_mag / n;
    s.mean_dx = sum_dx / n;
    s.mean_dy = sum_dy / n;
  }
  if (s.moving_blocks > 0) {
    s.angular_coherence = std::min(1.0, std::hypot(unit_x, unit_y) / s.moving_blocks);
  }
  if (radial_counted > 0) {
    s.radial_fraction = static_cast<double>(std::max(outward, inward)) / radial_counted;
  }
  if (!per_field.empty()) {
    double mean = 0.0;
    for (double m : per_field) mean += m;
    mean /= per_field.size();
    double var = 0.0;
    for (double m : per_field) var += (m - mean) * (m - mean);
    s.temporal_variance = var / per_field.size();
  }
  return s;
}

FilterVerdict classify_motion(const MotionStats& stats, const MotionThresholds& t,
                              const std::string& clip_id) {
  FilterVerdict v;
  v.clip_id = clip_id;
  v.scores["motion_magnitude"] = stats.mean_magnitude;
  v.scores["motion_coherence"] = stats.angular_coherence;
  v.scores["motion_variance"] = stats.temporal_variance;

  if (stats.mean_magnitude < t.static_magnitude) {
    v.reject(RejectReason::Static);
    v.tags.insert("static");
    return v;
  }
  if (stats.temporal_variance > t.shaky_variance && stats.angular_coherence < t.shaky_coherence) {
    v.reject(RejectReason::Shaky);
    v.tags.insert("shaky");
    return v;
  }
  if (stats.angular_coherence >= t.coherence_pan) {
    v.tags.insert(std::abs(stats.mean_dx) >= std::abs(stats.mean_dy) ? "pan" : "tilt");
  }
  if (stats.moving_blocks > 0 && stats.radial_fraction >= t.zoom_fraction) v.tags.insert("zoom");
  return v;
}

}  // namespace curator::filters
