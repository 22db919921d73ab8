#include <atomic>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "curator/annotate/captioning.hpp"

using namespace curator::annotate;
using curator::ServiceError;
using namespace std::chrono_literals;

namespace {

// Fails the first `failures` calls for each (clip, window), then echoes.
class FlakyCaptioner : public CaptionClient {
 public:
  FlakyCaptioner(int failures, ServiceError::Kind kind) : failures_(failures), kind_(kind) {}
  std::string caption(const CaptionRequest& r) override {
    const int in = ++inflight;
    int seen = peak.load();
    while (in > seen && !peak.compare_exchange_weak(seen, in)) {
    }
    int n;
    {
      std::lock_guard lock(mu_);
      n = ++calls_[r.clip_id + "#" + std::to_string(r.window_index)];
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
    --inflight;
    if (n <= failures_) throw ServiceError(kind_, "flaky");
    return "caption for " + r.clip_id;
  }
  std::atomic<int> inflight{0};
  std::atomic<int> peak{0};

 private:
  int failures_;
  ServiceError::Kind kind_;
  std::mutex mu_;
  std::map<std::string, int> calls_;
};

std::vector<CaptionRequest> requests(int n) {
  std::vector<CaptionRequest> out;
  for (int i = 0; i < n; ++i) out.push_back(build_caption_request("clip" + std::to_string(i), {0, 64}, 0));
  return out;
}

RetryPolicy recording(std::vector<std::chrono::milliseconds>& slept, int retries) {
  RetryPolicy p;
  p.max_retries = retries;
  p.sleep = [&slept](std::chrono::milliseconds d) { slept.push_back(d); };
  return p;
}

}  // namespace

TEST(Windows, Examples) {
  EXPECT_EQ(window_clip(256), (std::vector<Window>{{0, 256}}));
  EXPECT_EQ(window_clip(520), (std::vector<Window>{{0, 256}, {256, 520}}));
  EXPECT_EQ(window_clip(300), (std::vector<Window>{{0, 256}, {256, 300}}));
  EXPECT_EQ(window_clip(10), (std::vector<Window>{{0, 10}}));
  EXPECT_EQ(window_clip(256 + 31), (std::vector<Window>{{0, 287}}));
  EXPECT_EQ(window_clip(256 + 32), (std::vector<Window>{{0, 256}, {256, 288}}));
  EXPECT_THROW(window_clip(0), std::invalid_argument);
}

TEST(Windows, PartitionTheClip) {
  for (std::int64_t n = 1; n < 2000; n += 7) {
    const auto w = window_clip(n);
    std::int64_t at = 0;
    for (const auto& x : w) {
      EXPECT_EQ(x.start, at);
      EXPECT_GT(x.end, x.start);
      at = x.end;
    }
    EXPECT_EQ(at, n);
  }
}

TEST(Requests, UniformIndicesAndPrompt) {
  const auto r = build_caption_request("c", {0, 256}, 0);
  EXPECT_EQ(r.frame_indices, (std::vector<std::int64_t>{0, 36, 73, 109, 146, 182, 219, 255}));
  EXPECT_EQ(r.prompt, "Elaborate on the visual and narrative elements of the video in detail");

  const auto small = build_caption_request("c", {0, 8}, 0);
  EXPECT_EQ(small.frame_indices, (std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6, 7}));

  const auto offset = build_caption_request("c", {256, 300}, 1, "Describe it.");
  EXPECT_EQ(offset.prompt, "Describe it.");
  EXPECT_EQ(offset.window_index, 1);
  EXPECT_EQ(offset.frame_indices.front(), 256);
  EXPECT_EQ(offset.frame_indices.back(), 299);

  const auto tiny = build_caption_request("c", {0, 3}, 0);
  EXPECT_EQ(tiny.frame_indices.size(), 3u);
  for (const auto& req : {r, small, offset, tiny})
    for (std::size_t i = 1; i < req.frame_indices.size(); ++i)
      EXPECT_LT(req.frame_indices[i - 1], req.frame_indices[i]);
}

TEST(Captions, CountsAndCap) {
  EXPECT_EQ(count_words("a  b"), 2u);
  EXPECT_EQ(count_words("  \t\n"), 0u);
  EXPECT_EQ(count_chars("h\xC3\xA9llo"), 5u);  // two-byte é

  const auto c = Caption::make("c", 0, "test caption");
  EXPECT_EQ(c.word_count, 2u);
  EXPECT_EQ(c.char_count, 12u);
  EXPECT_TRUE(c.counts_consistent());

  std::string long_text;
  for (int i = 0; i < 1500; ++i) long_text += "\xC3\xA9";  // 3000 bytes
  const auto capped = Caption::make("c", 0, long_text);
  EXPECT_LE(capped.text.size(), kMaxCaptionBytes);
  EXPECT_EQ(capped.text.size() % 2, 0u);  // no split code point
  EXPECT_TRUE(capped.counts_consistent());

  auto tampered = c;
  tampered.word_count = 3;
  EXPECT_FALSE(tampered.counts_consistent());
}

TEST(Corpus, StubEchoesText) {
  StubCaptioner stub("test caption");
  const auto reqs = requests(5);
  const auto batch = caption_corpus(reqs, stub);
  ASSERT_EQ(batch.captions.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(batch.captions[i].text, "test caption");
    EXPECT_EQ(batch.captions[i].word_count, 2u);
    EXPECT_EQ(batch.captions[i].clip_id, reqs[i].clip_id);
  }
  EXPECT_TRUE(batch.failures.empty());
}

TEST(Corpus, DefaultStubIsDeterministic) {
  StubCaptioner stub;
  const auto r = build_caption_request("abc", {0, 100}, 0);
  EXPECT_EQ(stub.caption(r), stub.caption(r));
  EXPECT_NE(stub.caption(r), stub.caption(build_caption_request("abd", {0, 100}, 0)));
}

TEST(Corpus, OneFailureThenSuccess) {
  FlakyCaptioner client(1, ServiceError::Kind::Unavailable);
  std::vector<std::chrono::milliseconds> slept;
  const auto reqs = requests(1);
  const auto batch = caption_corpus(reqs, client, recording(slept, 2));
  ASSERT_EQ(batch.captions.size(), 1u);
  EXPECT_EQ(batch.retries, 1u);
  EXPECT_TRUE(batch.failures.empty());
  EXPECT_EQ(slept, (std::vector<std::chrono::milliseconds>{50ms}));
}

TEST(Corpus, PersistentFailureIsRecordedNotThrown) {
  FlakyCaptioner client(100, ServiceError::Kind::Timeout);
  std::vector<std::chrono::milliseconds> slept;
  const auto reqs = requests(3);
  const auto batch = caption_corpus(reqs, client, recording(slept, 2), 1);
  EXPECT_TRUE(batch.captions.empty());
  ASSERT_EQ(batch.failures.size(), 3u);
  EXPECT_EQ(batch.failures[1].clip_id, "clip1");
  EXPECT_EQ(batch.failures[1].kind, ServiceError::Kind::Timeout);
  EXPECT_EQ(batch.retries, 6u);
  // Exponential backoff per item: 50, 100.
  ASSERT_EQ(slept.size(), 6u);
  EXPECT_EQ(slept[0], 50ms);
  EXPECT_EQ(slept[1], 100ms);
}

TEST(Corpus, InflightIsBounded) {
  FlakyCaptioner client(0, ServiceError::Kind::Unavailable);
  const auto reqs = requests(64);
  const auto batch = caption_corpus(reqs, client, {}, 3);
  EXPECT_EQ(batch.captions.size(), 64u);
  EXPECT_LE(client.peak.load(), 3);
  for (std::size_t i = 0; i < reqs.size(); ++i) EXPECT_EQ(batch.captions[i].clip_id, reqs[i].clip_id);
}

TEST(Stats, Examples) {
  const std::vector<Caption> two{Caption::make("a", 0, std::string(10, 'x')),
                                 Caption::make("b", 0, std::string(20, 'y'))};
  const auto s = caption_stats(two);
  EXPECT_DOUBLE_EQ(s.mean_chars, 15.0);
  EXPECT_DOUBLE_EQ(s.mean_words, 1.0);
  EXPECT_EQ(s.word_histogram.at(0), 2u);

  const std::vector<Caption> empty{Caption::make("a", 0, "")};
  const auto e = caption_stats(empty);
  EXPECT_DOUBLE_EQ(e.mean_chars, 0.0);
  EXPECT_DOUBLE_EQ(e.mean_words, 0.0);

  EXPECT_THROW(caption_stats({}), EmptyCorpus);
}

TEST(Stats, HistogramBucketsOfTwentyFive) {
  std::vector<Caption> caps;
  for (int words : {3, 24, 25, 97, 120}) {
    std::string t;
    for (int i = 0; i < words; ++i) t += "w ";
    caps.push_back(Caption::make("c", 0, t));
  }
  const auto s = caption_stats(caps);
  EXPECT_EQ(s.word_histogram.at(0), 2u);
  EXPECT_EQ(s.word_histogram.at(25), 1u);
  EXPECT_EQ(s.word_histogram.at(75), 1u);
  EXPECT_EQ(s.word_histogram.at(100), 1u);
  EXPECT_DOUBLE_EQ(s.mean_words, (3 + 24 + 25 + 97 + 120) / 5.0);
}
