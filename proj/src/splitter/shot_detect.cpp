#include "curator/splitter/shot_detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace curator::splitter {

void HistogramDetectorParams::validate() const {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("histogram detector: threshold must be in (0, 1]");
  }
  if (min_scene_len < 1) throw std::invalid_argument("histogram detector: min_scene_len < 1");
  if (bins < 2) throw std::invalid_argument("histogram detector: bins < 2");
}

HistogramShotDetector::HistogramShotDetector(HistogramDetectorParams params)
    : params_(params) {
  params_.validate();
}

std::optional<ShotBoundary> HistogramShotDetector::feed(const frame_io::RgbImage& frame) {
  return feed(hsv_histogram(frame, params_.bins));
}

std::optional<ShotBoundary> HistogramShotDetector::feed(const HsvHistogram& hist) {
  std::optional<ShotBoundary> out;
  const std::int64_t i = index_++;
  if (previous_) {
    const double d = hist_distance(*previous_, hist);
    const bool spaced = !last_boundary_ || i - *last_boundary_ >= params_.min_scene_len;
    if (d > params_.threshold && spaced) {
      out = ShotBoundary{i, std::clamp(d, 0.0, 1.0)};
      last_boundary_ = i;
    }
  }
  previous_ = hist;
  return out;
}

std::vector<ShotBoundary> detect_shots_histogram(std::span<const frame_io::RgbImage> frames,
                                                 const HistogramDetectorParams& params) {
  HistogramShotDetector detector(params);
  std::vector<ShotBoundary> out;
  for (const auto& f : frames) {
    if (auto b = detector.feed(f)) out.push_back(*b);
  }
  return out;
}

std::vector<double> HttpBoundaryDetector::predict(std::span<const frame_io::RgbImage> window) {
  nlohmann::json body;
  body["width"] = kProbeWidth;
  body["height"] = kProbeHeight;
  auto& frames = body["frames"] = nlohmann::json::array();
  for (const auto& img : window) frames.push_back(base64_encode(img.data.data(), img.data.size()));
  const auto reply = post_json(endpoint_, body);
  if (!reply.is_array()) {
    throw ServiceError(ServiceError::Kind::Malformed, "detector reply is not an array");
  }
  std::vector<double> probs;
  for (const auto& v : reply) {
    if (!v.is_number()) throw ServiceError(ServiceError::Kind::Malformed, "non-numeric probability");
    probs.push_back(v.get<double>());
  }
  return probs;
}

std::vector<double> neural_boundary_probe(std::span<const frame_io::RgbImage> frames,
                                          BoundaryDetectorClient& client) {
  if (frames.empty() || frames.size() > static_cast<std::size_t>(kProbeWindow)) {
    throw std::invalid_argument("neural_boundary_probe: need 1..100 frames");
  }
  std::vector<frame_io::RgbImage> window;
  window.reserve(kProbeWindow);
  for (const auto& f : frames) window.push_back(frame_io::resize_nearest(f, kProbeWidth, kProbeHeight));
  while (window.size() < static_cast<std::size_t>(kProbeWindow)) window.push_back(window.back());

  auto probs = client.predict(window);
  if (probs.size() != static_cast<std::size_t>(kProbeWindow)) {
    throw ServiceError(ServiceError::Kind::Malformed,
                       "detector returned " + std::to_string(probs.size()) + " probabilities");
  }
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ServiceError(ServiceError::Kind::Malformed, "detector probability outside [0, 1]");
    }
  }
  return probs;
}

std::vector<ShotBoundary> peaks_to_boundaries(std::span<const double> probs, std::int64_t offset,
                                              double threshold, std::size_t valid) {
  std::vector<ShotBoundary> out;
  const std::size_t n = std::min(valid, probs.size());
  std::size_t i = 0;
  while (i < n) {
    if (probs[i] <= threshold) {
      ++i;
      continue;
    }
    std::size_t best = i;
    for (; i < n && probs[i] > threshold; ++i) {
      if (probs[i] > probs[best]) best = i;
    }
    const std::int64_t frame = offset + static_cast<std::int64_t>(best);
    if (frame >= 1) out.push_back({frame, probs[best]});
  }
  return out;
}

std::vector<ShotBoundary> merge_boundaries(std::vector<ShotBoundary> candidates,
                                           std::int64_t window) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const ShotBoundary& a, const ShotBoundary& b) {
                     return a.frame_index < b.frame_index;
                   });
  std::vector<ShotBoundary> out;
  for (const auto& c : candidates) {
    if (!out.empty() && c.frame_index - out.back().frame_index <= window) {
      if (c.confidence > out.back().confidence) out.back() = c;
      continue;
    }
    out.push_back(c);
  }
  return out;
}

std::vector<ShotBoundary> detect_shots_neural(std::span<const frame_io::RgbImage> frames,
                                              BoundaryDetectorClient& client,
                                              const NeuralDetectorParams& params) {
  if (params.stride < 1) throw std::invalid_argument("detect_shots_neural: stride < 1");
  std::vector<ShotBoundary> candidates;
  const auto n = static_cast<std::int64_t>(frames.size());
  for (std::int64_t start = 0; start < n; start += params.stride) {
    const std::int64_t len = std::min<std::int64_t>(kProbeWindow, n - start);
    const auto probs = neural_boundary_probe(frames.subspan(start, len), client);
    auto peaks = peaks_to_boundaries(probs, start, params.threshold, static_cast<std::size_t>(len));
    candidates.insert(candidates.end(), peaks.begin(), peaks.end());
    if (start + kProbeWindow >= n) break;
  }
  return merge_boundaries(std::move(candidates), params.merge_window);
}

}  // namespace curator::splitter
