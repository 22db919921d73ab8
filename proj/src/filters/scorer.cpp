#include "curator/filters/scorer.hpp"

#include <cmath>

#include "curator/common/hash.hpp"

namespace curator::filters {

double StubScorer::score(const std::string& clip_id, std::span<const frame_io::RgbImage>) {
  std::uint64_t state = fnv1a64(clip_id) ^ salt_;
  const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  return lo_ + (hi_ - lo_) * u;
}

double HttpScorer::score(const std::string& clip_id, std::span<const frame_io::RgbImage> frames) {
  nlohmann::json body;
  body["clip_id"] = clip_id;
  auto& arr = body["frames"] = nlohmann::json::array();
  for (const auto& img : frames) {
    const auto scaled = frame_io::resize_nearest(img, 224, 224);
    arr.push_back(base64_encode(scaled.data.data(), scaled.data.size()));
  }
  const auto reply = post_json(endpoint_, body);
  if (!reply.is_object() || !reply.contains("score") || !reply["score"].is_number()) {
    throw ServiceError(ServiceError::Kind::Malformed, "scorer reply lacks a numeric \"score\"");
  }
  const double s = reply["score"].get<double>();
  if (!std::isfinite(s)) throw ServiceError(ServiceError::Kind::Malformed, "scorer returned a non-finite score");
  return s;
}

}  // namespace curator::filters
