#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curator/common/http.hpp"
#include "curator/frame_io/color.hpp"

namespace curator::dedup {

inline constexpr int kDefaultEmbeddingDim = 512;

struct Embedding {
  std::string clip_id;
  std::vector<float> vector;
  bool normalized = false;

  std::size_t dim() const { return vector.size(); }
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double dot(std::span<const float> a, std::span<const float> b);
double l2_norm(std::span<const float> v);
double cosine_similarity(std::span<const float> a, std::span<const float> b);

/// Scales to unit length in place; a zero vector is left unchanged and
/// reported by returning false.
bool normalize(std::vector<float>& v);

class EmbedderClient {
 public:
  virtual ~EmbedderClient() = default;
  /// Raw (not necessarily normalized) vector. Throws ServiceError.
  virtual std::vector<float> embed(const std::string& clip_id,
                                   std::span<const frame_io::RgbImage> frames) = 0;
  /// Query-text embedding in the same space. Throws ServiceError.
  virtual std::vector<float> embed_text(const std::string& text) = 0;
};

/// Seeded pseudo-random unit vectors keyed by clip id: same id, same vector.
class StubEmbedder : public EmbedderClient {
 public:
  explicit StubEmbedder(int dim = kDefaultEmbeddingDim, std::uint64_t seed = 0)
      : dim_(dim), seed_(seed) {}
  std::vector<float> embed(const std::string& clip_id,
                           std::span<const frame_io::RgbImage> frames) override;
  std::vector<float> embed_text(const std::string& text) override;
  int dim() const { return dim_; }

 private:
  int dim_;
  std::uint64_t seed_;
};

/// POST {clip_id, frames} -> {"vector": [...]}. Text queries go to a
/// separate endpoint as {text} -> {"vector": [...]}.
class HttpEmbedder : public EmbedderClient {
 public:
  HttpEmbedder(HttpEndpoint video_endpoint, std::optional<HttpEndpoint> text_endpoint = {})
      : video_(std::move(video_endpoint)), text_(std::move(text_endpoint)) {}
  std::vector<float> embed(const std::string& clip_id,
                           std::span<const frame_io::RgbImage> frames) override;
  std::vector<float> embed_text(const std::string& text) override;

 private:
  HttpEndpoint video_;
  std::optional<HttpEndpoint> text_;
};

struct EmbedFailure {
  std::string clip_id;
  std::string message;
};

struct EmbedBatch {
  std::vector<Embedding> embeddings;
  std::vector<EmbedFailure> failures;
};

using ClipFrames = std::function<std::vector<frame_io::RgbImage>(const std::string& clip_id)>;

/// One L2-normalized `dim`-vector per clip. Client errors, wrong dimensions
/// and zero vectors are recorded per clip.
EmbedBatch embed_corpus(std::span<const std::string> clip_ids, EmbedderClient& client, int dim,
                        const ClipFrames& frames = {});

}  // namespace curator::dedup
