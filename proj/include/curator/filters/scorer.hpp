#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "curator/common/http.hpp"
#include "curator/frame_io/color.hpp"

namespace curator::filters {

/// Perceptual-quality or aesthetic scorer over a clip's sampled frames.
class ScorerClient {
 public:
  virtual ~ScorerClient() = default;
  /// Throws ServiceError. Must be safe to call concurrently.
  virtual double score(const std::string& clip_id, std::span<const frame_io::RgbImage> frames) = 0;
};

/// Deterministic score in [lo, hi) derived from the clip id and a salt.
class StubScorer : public ScorerClient {
 public:
  StubScorer(double lo, double hi, std::uint64_t salt = 0) : lo_(lo), hi_(hi), salt_(salt) {}
  double score(const std::string& clip_id, std::span<const frame_io::RgbImage> frames) override;

 private:
  double lo_, hi_;
  std::uint64_t salt_;
};

/// POSTs {clip_id, frames: [base64 224x224 RGB]} and reads {"score": float}.
class HttpScorer : public ScorerClient {
 public:
  explicit HttpScorer(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  double score(const std::string& clip_id, std::span<const frame_io::RgbImage> frames) override;

 private:
  HttpEndpoint endpoint_;
};

}  // namespace curator::filters
