#include "curator/dedup/embedding.hpp"

#include <cmath>
#include <numbers>

#include "curator/common/hash.hpp"

namespace curator::dedup {
namespace {

std::vector<float> parse_vector(const nlohmann::json& reply) {
  if (!reply.is_object() || !reply.contains("vector") || !reply["vector"].is_array()) {
    throw ServiceError(ServiceError::Kind::Malformed, "embedder reply lacks \"vector\"");
  }
  std::vector<float> v;
  for (const auto& x : reply["vector"]) {
    if (!x.is_number()) throw ServiceError(ServiceError::Kind::Malformed, "non-numeric component");
    v.push_back(x.get<float>());
  }
  return v;
}

std::vector<float> gaussian_unit_vector(std::uint64_t state, int dim) {
  std::vector<float> v(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; i += 2) {
    // Box-Muller on two 53-bit uniforms; u1 kept away from zero.
    const double u1 = (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = static_cast<float>(r * std::cos(2.0 * std::numbers::pi * u2));
    if (i + 1 < dim) v[i + 1] = static_cast<float>(r * std::sin(2.0 * std::numbers::pi * u2));
  }
  normalize(v);
  return v;
}

}  // namespace

double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

double l2_norm(std::span<const float> v) { return std::sqrt(dot(v, v)); }

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  const double na = l2_norm(a), nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

bool normalize(std::vector<float>& v) {
  const double n = l2_norm(v);
  if (n == 0.0 || !std::isfinite(n)) return false;
  for (float& x : v) x = static_cast<float>(x / n);
  return true;
}

std::vector<float> StubEmbedder::embed(const std::string& clip_id,
                                       std::span<const frame_io::RgbImage>) {
  return gaussian_unit_vector(fnv1a64(clip_id) ^ seed_, dim_);
}

std::vector<float> StubEmbedder::embed_text(const std::string& text) {
  return gaussian_unit_vector(fnv1a64("text:" + text) ^ seed_, dim_);
}

std::vector<float> HttpEmbedder::embed(const std::string& clip_id,
                                       std::span<const frame_io::RgbImage> frames) {
  nlohmann::json body;
  body["clip_id"] = clip_id;
  auto& arr = body["frames"] = nlohmann::json::array();
  for (const auto& img : frames) {
    const auto scaled = frame_io::resize_nearest(img, 224, 224);
    arr.push_back(base64_encode(scaled.data.data(), scaled.data.size()));
  }
  return parse_vector(post_json(video_, body));
}

std::vector<float> HttpEmbedder::embed_text(const std::string& text) {
  if (!text_) throw ServiceError(ServiceError::Kind::Unavailable, "no text embedding endpoint");
  return parse_vector(post_json(*text_, {{"text", text}}));
}

EmbedBatch embed_corpus(std::span<const std::string> clip_ids, EmbedderClient& client, int dim,
                        const ClipFrames& frames) {
  EmbedBatch batch;
  for (const auto& id : clip_ids) {
    try {
      std::vector<frame_io::RgbImage> imgs;
      if (frames) imgs = frames(id);
      auto v = client.embed(id, imgs);
      if (static_cast<int>(v.size()) != dim) {
        batch.failures.push_back({id, "embedder returned " + std::to_string(v.size()) +
                                          " dims, expected " + std::to_string(dim)});
        continue;
      }
      if (!normalize(v)) {
        batch.failures.push_back({id, "embedder returned a zero or non-finite vector"});
        continue;
      }
      batch.embeddings.push_back({id, std::move(v), true});
    } catch (const std::exception& e) {
      batch.failures.push_back({id, e.what()});
    }
  }
  return batch;
}

}  // namespace curator::dedup
