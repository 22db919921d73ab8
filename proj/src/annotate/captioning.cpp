#include "curator/annotate/captioning.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <optional>
#include <thread>

#include "curator/common/hash.hpp"
#include "curator/frame_io/sampling.hpp"

namespace curator::annotate {

std::vector<Window> window_clip(std::int64_t frames, std::int64_t window, std::int64_t min_tail) {
  if (frames < 1) throw std::invalid_argument("window_clip: clip must have at least one frame");
  if (window < 1 || min_tail < 0) throw std::invalid_argument("window_clip: bad window size");
  std::vector<Window> out;
  for (std::int64_t start = 0; start < frames; start += window) {
    const std::int64_t end = std::min(frames, start + window);
    if (end - start < min_tail && !out.empty()) {
      out.back().end = end;
      break;
    }
    out.push_back({start, end});
  }
  return out;
}

CaptionRequest build_caption_request(const std::string& clip_id, const Window& window,
                                     int window_index, std::string_view prompt,
                                     std::string frames_ref) {
  if (window.start < 0 || window.end <= window.start) {
    throw std::invalid_argument("build_caption_request: empty window");
  }
  CaptionRequest req;
  req.clip_id = clip_id;
  req.window_index = window_index;
  req.prompt = std::string(prompt);
  req.frames_ref = std::move(frames_ref);
  for (std::int64_t i : frame_io::sample_uniform_frames(window.end - window.start, kFramesPerRequest)) {
    req.frame_indices.push_back(window.start + i);
  }
  return req;
}

std::size_t count_chars(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::size_t count_words(std::string_view s) {
  std::size_t words = 0;
  bool in_word = false;
  for (char c : s) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

Caption Caption::make(std::string clip_id, int window_index, std::string text) {
  if (text.size() > kMaxCaptionBytes) {
    std::size_t cut = kMaxCaptionBytes;
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
    text.resize(cut);
  }
  Caption c;
  c.clip_id = std::move(clip_id);
  c.window_index = window_index;
  c.char_count = count_chars(text);
  c.word_count = count_words(text);
  c.text = std::move(text);
  return c;
}

bool Caption::counts_consistent() const {
  return char_count == count_chars(text) && word_count == count_words(text);
}

std::string StubCaptioner::caption(const CaptionRequest& request) {
  if (!fixed_.empty()) return fixed_;
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(request.clip_id)));
  return "A video clip with steady camera motion across a textured scene. Reference " +
         std::string(hex) + " window " + std::to_string(request.window_index) + ".";
}

std::string HttpCaptioner::caption(const CaptionRequest& request) {
  nlohmann::json body;
  body["clip_id"] = request.clip_id;
  body["prompt"] = request.prompt;
  auto& frames = body["frames"] = nlohmann::json::array();
  if (frames_) {
    for (const auto& img : frames_(request)) {
      const auto scaled = frame_io::resize_nearest(img, 224, 224);
      frames.push_back(base64_encode(scaled.data.data(), scaled.data.size()));
    }
  }
  const auto reply = post_json(endpoint_, body);
  if (!reply.is_object() || !reply.contains("caption") || !reply["caption"].is_string()) {
    throw ServiceError(ServiceError::Kind::Malformed, "captioner reply lacks \"caption\"");
  }
  return reply["caption"].get<std::string>();
}

CaptionBatch caption_corpus(std::span<const CaptionRequest> requests, CaptionClient& client,
                            const RetryPolicy& policy, unsigned max_inflight) {
  struct Slot {
    std::optional<Caption> caption;
    std::optional<CaptionFailure> failure;
    std::size_t retries = 0;
  };
  std::vector<Slot> slots(requests.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      const auto& req = requests[i];
      auto backoff = policy.base_backoff;
      for (int attempt = 0;; ++attempt) {
        try {
          slots[i].caption = Caption::make(req.clip_id, req.window_index, client.caption(req));
          break;
        } catch (const ServiceError& e) {
          if (attempt >= policy.max_retries) {
            slots[i].failure = CaptionFailure{req.clip_id, req.window_index, e.kind(), e.what()};
            break;
          }
        } catch (const std::exception& e) {
          if (attempt >= policy.max_retries) {
            slots[i].failure = CaptionFailure{req.clip_id, req.window_index,
                                              ServiceError::Kind::Unavailable, e.what()};
            break;
          }
        }
        ++slots[i].retries;
        if (policy.sleep) {
          policy.sleep(backoff);
        } else {
          std::this_thread::sleep_for(backoff);
        }
        backoff = std::chrono::milliseconds(
            static_cast<long long>(static_cast<double>(backoff.count()) * policy.multiplier));
      }
    }
  };

  const unsigned threads =
      std::max(1u, std::min<unsigned>(max_inflight, static_cast<unsigned>(requests.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  CaptionBatch batch;
  for (auto& s : slots) {
    batch.retries += s.retries;
    if (s.caption) batch.captions.push_back(std::move(*s.caption));
    if (s.failure) batch.failures.push_back(std::move(*s.failure));
  }
  return batch;
}

CaptionStats caption_stats(std::span<const Caption> captions) {
  if (captions.empty()) throw EmptyCorpus("caption_stats: no captions");
  CaptionStats st;
  double chars = 0.0, words = 0.0;
  for (const auto& c : captions) {
    chars += static_cast<double>(count_chars(c.text));
    const auto w = count_words(c.text);
    words += static_cast<double>(w);
    ++st.word_histogram[w / 25 * 25];
  }
  st.mean_chars = chars / captions.size();
  st.mean_words = words / captions.size();
  return st;
}

}  // namespace curator::annotate
