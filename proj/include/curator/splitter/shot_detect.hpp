#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "curator/common/http.hpp"
#include "curator/frame_io/color.hpp"
#include "curator/splitter/histogram.hpp"

namespace curator::splitter {

/// First frame of a new shot.
struct ShotBoundary {
  std::int64_t frame_index = 0;
  double confidence = 0.0;

  bool operator==(const ShotBoundary&) const = default;
};

struct HistogramDetectorParams {
  double threshold = 0.05;        // in (0, 1]
  std::int64_t min_scene_len = 1; // frames between emitted boundaries
  int bins = 16;

  void validate() const;
};

/// Streaming histogram cut detector: feed frames in order, one call each.
class HistogramShotDetector {
 public:
  explicit HistogramShotDetector(HistogramDetectorParams params);

  std::optional<ShotBoundary> feed(const frame_io::RgbImage& frame);
  std::optional<ShotBoundary> feed(const HsvHistogram& hist);
  std::int64_t frames_seen() const { return index_; }

 private:
  HistogramDetectorParams params_;
  std::optional<HsvHistogram> previous_;
  std::optional<std::int64_t> last_boundary_;
  std::int64_t index_ = 0;
};

std::vector<ShotBoundary> detect_shots_histogram(std::span<const frame_io::RgbImage> frames,
                                                 const HistogramDetectorParams& params);

// ---------------------------------------------------------------------------
// Neural transition detector contract

inline constexpr int kProbeWindow = 100;
inline constexpr int kProbeWidth = 48;
inline constexpr int kProbeHeight = 27;

/// Per-frame transition probabilities for a window of kProbeWindow frames,
/// each already downscaled to kProbeWidth x kProbeHeight.
class BoundaryDetectorClient {
 public:
  virtual ~BoundaryDetectorClient() = default;
  virtual std::vector<double> predict(std::span<const frame_io::RgbImage> window) = 0;
};

/// POSTs {"frames": [base64 RGB...], "width": 48, "height": 27} and expects a
/// JSON array of 100 floats.
class HttpBoundaryDetector : public BoundaryDetectorClient {
 public:
  explicit HttpBoundaryDetector(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::vector<double> predict(std::span<const frame_io::RgbImage> window) override;

 private:
  HttpEndpoint endpoint_;
};

/// Pads `frames` (1..100 of them) to 100 by repeating the last one,
/// downscales and queries the client. Throws ServiceError(Malformed) unless
/// the reply is 100 probabilities in [0, 1].
std::vector<double> neural_boundary_probe(std::span<const frame_io::RgbImage> frames,
                                          BoundaryDetectorClient& client);

/// One boundary per run of probabilities above `threshold`, at the run's
/// argmax, shifted by `offset`. Only the first `valid` entries are read.
std::vector<ShotBoundary> peaks_to_boundaries(std::span<const double> probs, std::int64_t offset,
                                              double threshold, std::size_t valid);

/// Collapses detections within `window` frames of each other, keeping the
/// higher confidence (earlier on ties).
std::vector<ShotBoundary> merge_boundaries(std::vector<ShotBoundary> candidates,
                                           std::int64_t window);

struct NeuralDetectorParams {
  double threshold = 0.4;
  std::int64_t stride = 50;
  std::int64_t merge_window = 2;
};

std::vector<ShotBoundary> detect_shots_neural(std::span<const frame_io::RgbImage> frames,
                                              BoundaryDetectorClient& client,
                                              const NeuralDetectorParams& params = {});

}  // namespace curator::splitter
