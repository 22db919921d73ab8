#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "curator/common/http.hpp"
#include "curator/frame_io/color.hpp"

namespace curator::annotate {

inline constexpr std::int64_t kCaptionWindow = 256;
inline constexpr std::int64_t kMinTailWindow = 32;
inline constexpr std::int64_t kFramesPerRequest = 8;
inline constexpr std::size_t kMaxCaptionBytes = 2048;
inline constexpr std::string_view kDefaultPrompt =
    "Elaborate on the visual and narrative elements of the video in detail";

/// Half-open frame range [start, end) relative to the clip.
struct Window {
  std::int64_t start = 0;
  std::int64_t end = 0;
  bool operator==(const Window&) const = default;
};

/// Consecutive windows of `window` frames. A trailing remainder shorter than
/// `min_tail` is folded into the previous window.
std::vector<Window> window_clip(std::int64_t frames, std::int64_t window = kCaptionWindow,
                                std::int64_t min_tail = kMinTailWindow);

struct CaptionRequest {
  std::string clip_id;
  int window_index = 0;
  std::vector<std::int64_t> frame_indices;  // clip-relative
  std::string prompt;
  std::string frames_ref;
};

CaptionRequest build_caption_request(const std::string& clip_id, const Window& window,
                                     int window_index,
                                     std::string_view prompt = kDefaultPrompt,
                                     std::string frames_ref = {});

struct Caption {
  std::string clip_id;
  int window_index = 0;
  std::string text;
  std::size_t char_count = 0;  // UTF-8 code points
  std::size_t word_count = 0;  // maximal runs of non-whitespace

  /// Builds a caption with counts derived from `text`, capped at
  /// kMaxCaptionBytes on a code-point boundary.
  static Caption make(std::string clip_id, int window_index, std::string text);
  bool counts_consistent() const;
};

std::size_t count_chars(std::string_view utf8);
std::size_t count_words(std::string_view text);

class CaptionClient {
 public:
  virtual ~CaptionClient() = default;
  /// Throws ServiceError on failure; must be safe to call concurrently.
  virtual std::string caption(const CaptionRequest& request) = 0;
};

/// Deterministic captioner: a fixed template followed by the clip id hash,
/// or a fixed text when one is given.
class StubCaptioner : public CaptionClient {
 public:
  StubCaptioner() = default;
  explicit StubCaptioner(std::string fixed_text) : fixed_(std::move(fixed_text)) {}
  std::string caption(const CaptionRequest& request) override;

 private:
  std::string fixed_;
};

using FrameProvider = std::function<std::vector<frame_io::RgbImage>(const CaptionRequest&)>;

/// POSTs {clip_id, prompt, frames: [base64 224x224 RGB]} and reads {"caption"}.
class HttpCaptioner : public CaptionClient {
 public:
  HttpCaptioner(HttpEndpoint endpoint, FrameProvider frames)
      : endpoint_(std::move(endpoint)), frames_(std::move(frames)) {}
  std::string caption(const CaptionRequest& request) override;

 private:
  HttpEndpoint endpoint_;
  FrameProvider frames_;
};

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds base_backoff{50};
  double multiplier = 2.0;
  /// Injected so tests can observe backoff without sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct CaptionFailure {
  std::string clip_id;
  int window_index = 0;
  ServiceError::Kind kind = ServiceError::Kind::Unavailable;
  std::string message;
};

struct CaptionBatch {
  std::vector<Caption> captions;
  std::vector<CaptionFailure> failures;
  std::size_t retries = 0;
};

/// Captions every request with bounded concurrency. Per-item failures are
/// recorded after the retry budget, never thrown. Output follows request order.
CaptionBatch caption_corpus(std::span<const CaptionRequest> requests, CaptionClient& client,
                            const RetryPolicy& policy = {}, unsigned max_inflight = 4);

class EmptyCorpus : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CaptionStats {
  double mean_chars = 0.0;
  double mean_words = 0.0;
  std::map<std::size_t, std::size_t> word_histogram;  // bucket start (width 25) -> count
};

CaptionStats caption_stats(std::span<const Caption> captions);

}  // namespace curator::annotate
