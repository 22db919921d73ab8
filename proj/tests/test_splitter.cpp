#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "curator/common/http.hpp"
#include "curator/splitter/clip_rules.hpp"
#include "curator/splitter/eval.hpp"
#include "curator/splitter/histogram.hpp"
#include "curator/splitter/shot_detect.hpp"

using namespace curator::splitter;
using curator::frame_io::RgbImage;
namespace fs = std::filesystem;

namespace {

RgbImage solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RgbImage img(w, h);
  for (std::size_t i = 0; i < img.data.size(); i += 3) {
    img.data[i] = r;
    img.data[i + 1] = g;
    img.data[i + 2] = b;
  }
  return img;
}

RgbImage noise(int w, int h, std::mt19937& rng) {
  RgbImage img(w, h);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng());
  return img;
}

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

// Oracle: maximum one-to-one matching by trying every assignment.
std::int64_t max_matching(const std::vector<std::int64_t>& pred, const std::vector<std::int64_t>& gt,
                          std::int64_t tol) {
  std::vector<bool> used(pred.size(), false);
  std::function<std::int64_t(std::size_t)> go = [&](std::size_t g) -> std::int64_t {
    if (g == gt.size()) return 0;
    std::int64_t best = go(g + 1);
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (used[p] || std::llabs(pred[p] - gt[g]) > tol) continue;
      used[p] = true;
      best = std::max(best, 1 + go(g + 1));
      used[p] = false;
    }
    return best;
  };
  return go(0);
}

// Frame i carries its index in every channel, so a stub can tell where the
// window sits in the stream.
std::vector<RgbImage> indexed_frames(int n) {
  std::vector<RgbImage> frames;
  for (int i = 0; i < n; ++i) {
    const auto v = static_cast<std::uint8_t>(i);
    frames.push_back(solid(96, 54, v, v, v));
  }
  return frames;
}

class SpikeDetector : public BoundaryDetectorClient {
 public:
  explicit SpikeDetector(std::vector<int> at) : at_(std::move(at)) {}
  std::vector<double> predict(std::span<const RgbImage> window) override {
    ++calls;
    std::vector<double> p;
    for (const auto& f : window) {
      EXPECT_EQ(f.width, kProbeWidth);
      EXPECT_EQ(f.height, kProbeHeight);
      const int idx = f.data[0];
      p.push_back(std::find(at_.begin(), at_.end(), idx) != at_.end() ? 1.0 : 0.0);
    }
    return p;
  }
  int calls = 0;

 private:
  std::vector<int> at_;
};

class FixedReply : public BoundaryDetectorClient {
 public:
  explicit FixedReply(std::vector<double> r) : reply(std::move(r)) {}
  std::vector<double> predict(std::span<const RgbImage>) override { return reply; }
  std::vector<double> reply;
};

}  // namespace

TEST(Histogram, SolidRedFillsOneBinPerChannel) {
  const auto h = hsv_histogram(solid(4, 4, 255, 0, 0), 8);
  EXPECT_DOUBLE_EQ(h.hue[0], 1.0);
  EXPECT_DOUBLE_EQ(h.saturation[7], 1.0);
  EXPECT_DOUBLE_EQ(h.value[7], 1.0);
}

TEST(Histogram, ChannelsAreNormalized) {
  std::mt19937 rng(3);
  for (int bins : {2, 7, 16, 64}) {
    const auto h = hsv_histogram(noise(17, 9, rng), bins);
    ASSERT_EQ(h.hue.size(), static_cast<std::size_t>(bins));
    EXPECT_NEAR(sum(h.hue), 1.0, 1e-12);
    EXPECT_NEAR(sum(h.saturation), 1.0, 1e-12);
    EXPECT_NEAR(sum(h.value), 1.0, 1e-12);
  }
  EXPECT_THROW(hsv_histogram(solid(2, 2, 0, 0, 0), 1), std::invalid_argument);
}

TEST(Histogram, InvariantUnderPixelPermutation) {
  std::mt19937 rng(5);
  auto img = noise(12, 8, rng);
  auto shuffled = img;
  std::vector<std::array<std::uint8_t, 3>> px;
  for (std::size_t i = 0; i < img.data.size(); i += 3)
    px.push_back({img.data[i], img.data[i + 1], img.data[i + 2]});
  std::shuffle(px.begin(), px.end(), rng);
  for (std::size_t i = 0; i < px.size(); ++i)
    std::copy(px[i].begin(), px[i].end(), shuffled.data.begin() + 3 * i);
  EXPECT_DOUBLE_EQ(hist_distance(hsv_histogram(img, 16), hsv_histogram(shuffled, 16)), 0.0);
}

TEST(Histogram, DistanceExamplesAndMetricProperties) {
  const auto red = hsv_histogram(solid(4, 4, 255, 0, 0), 16);
  const auto blue = hsv_histogram(solid(4, 4, 0, 0, 255), 16);
  EXPECT_NEAR(hist_distance(red, blue), 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(hist_distance(red, red), 0.0);

  std::mt19937 rng(9);
  for (int t = 0; t < 50; ++t) {
    const auto a = hsv_histogram(noise(8, 8, rng), 16);
    const auto b = hsv_histogram(noise(8, 8, rng), 16);
    const double d = hist_distance(a, b);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
    EXPECT_DOUBLE_EQ(d, hist_distance(b, a));
  }
  EXPECT_THROW(hist_distance(red, hsv_histogram(solid(4, 4, 0, 0, 255), 8)), BinMismatch);
}

TEST(HistogramDetector, RedThenBlueGivesOneCut) {
  std::vector<RgbImage> frames(60, solid(8, 8, 255, 0, 0));
  frames.insert(frames.end(), 60, solid(8, 8, 0, 0, 255));
  const auto cuts = detect_shots_histogram(frames, {0.05, 1, 16});
  ASSERT_EQ(cuts.size(), 1u);
  EXPECT_EQ(cuts[0].frame_index, 60);
  EXPECT_NEAR(cuts[0].confidence, 1.0 / 3.0, 1e-12);
}

TEST(HistogramDetector, ConstantStreamHasNoCuts) {
  std::vector<RgbImage> frames(30, solid(8, 8, 10, 200, 30));
  EXPECT_TRUE(detect_shots_histogram(frames, {}).empty());
  EXPECT_TRUE(detect_shots_histogram({}, {}).empty());
}

TEST(HistogramDetector, MinSceneLenSuppressesNearbyCuts) {
  const auto red = solid(8, 8, 255, 0, 0);
  const auto blue = solid(8, 8, 0, 0, 255);
  std::vector<RgbImage> frames(10, red);
  frames.insert(frames.end(), 3, blue);
  frames.insert(frames.end(), 10, red);
  EXPECT_EQ(detect_shots_histogram(frames, {0.05, 1, 16}).size(), 2u);
  const auto spaced = detect_shots_histogram(frames, {0.05, 10, 16});
  ASSERT_EQ(spaced.size(), 1u);
  EXPECT_EQ(spaced[0].frame_index, 10);
}

TEST(HistogramDetector, BoundariesAreSpacedByMinSceneLen) {
  std::mt19937 rng(17);
  for (int t = 0; t < 20; ++t) {
    std::vector<RgbImage> frames;
    for (int i = 0; i < 80; ++i) frames.push_back(noise(6, 6, rng));
    const std::int64_t m = 1 + t % 7;
    const auto cuts = detect_shots_histogram(frames, {0.05, m, 8});
    for (std::size_t i = 1; i < cuts.size(); ++i)
      EXPECT_GE(cuts[i].frame_index - cuts[i - 1].frame_index, m);
    for (const auto& c : cuts) {
      EXPECT_GE(c.frame_index, 1);
      EXPECT_LT(c.frame_index, 80);
    }
  }
}

TEST(HistogramDetector, ParamsAreValidated) {
  EXPECT_THROW((HistogramDetectorParams{0.0, 1, 16}.validate()), std::invalid_argument);
  EXPECT_THROW((HistogramDetectorParams{1.5, 1, 16}.validate()), std::invalid_argument);
  EXPECT_THROW((HistogramDetectorParams{0.5, 0, 16}.validate()), std::invalid_argument);
  EXPECT_THROW((HistogramDetectorParams{0.5, 1, 1}.validate()), std::invalid_argument);
}

TEST(NeuralDetector, SpikeBecomesOneBoundary) {
  const auto frames = indexed_frames(200);
  SpikeDetector client({120});
  const auto cuts = detect_shots_neural(frames, client);
  ASSERT_EQ(cuts.size(), 1u);
  EXPECT_EQ(cuts[0].frame_index, 120);
  EXPECT_DOUBLE_EQ(cuts[0].confidence, 1.0);
  EXPECT_EQ(client.calls, 3);  // windows at 0, 50, 100
}

TEST(NeuralDetector, ZeroProbabilitiesGiveNothing) {
  const auto frames = indexed_frames(150);
  SpikeDetector client({});
  EXPECT_TRUE(detect_shots_neural(frames, client).empty());
}

TEST(NeuralDetector, ShortStreamIsPaddedAndPaddingIgnored) {
  const auto frames = indexed_frames(30);
  // Padding repeats frame 29; a spike there must be reported once, at 29.
  SpikeDetector client({29});
  const auto cuts = detect_shots_neural(frames, client);
  ASSERT_EQ(cuts.size(), 1u);
  EXPECT_EQ(cuts[0].frame_index, 29);
}

TEST(NeuralDetector, MalformedRepliesAreRejected) {
  const auto frames = indexed_frames(10);
  FixedReply short_reply(std::vector<double>(99, 0.0));
  try {
    neural_boundary_probe(frames, short_reply);
    FAIL();
  } catch (const curator::ServiceError& e) {
    EXPECT_EQ(e.kind(), curator::ServiceError::Kind::Malformed);
  }
  FixedReply out_of_range(std::vector<double>(100, 1.5));
  EXPECT_THROW(neural_boundary_probe(frames, out_of_range), curator::ServiceError);
}

TEST(NeuralDetector, PeaksAndMerging) {
  const std::vector<double> p{0.0, 0.5, 0.9, 0.6, 0.1, 0.41, 0.0, 0.4};
  const auto peaks = peaks_to_boundaries(p, 10, 0.4, p.size());
  ASSERT_EQ(peaks.size(), 2u);  // 0.4 is not above the threshold
  EXPECT_EQ(peaks[0].frame_index, 12);
  EXPECT_EQ(peaks[1].frame_index, 15);
  EXPECT_EQ(peaks_to_boundaries(p, 10, 0.4, 4).size(), 1u);

  const auto merged = merge_boundaries({{50, 0.7}, {51, 0.9}, {80, 0.5}, {52, 0.9}}, 2);
  ASSERT_EQ(merged.size(), 2u);
  EXPECT_EQ(merged[0].frame_index, 51);
  EXPECT_EQ(merged[1].frame_index, 80);
}

TEST(ClipRules, DurationEdges) {
  // 100 fps: 199 frames = 1.99 s, 200 frames = 2.00 s.
  EXPECT_TRUE(apply_clip_rules({}, 199, 100, 1, "a").empty());
  const auto kept = apply_clip_rules({}, 200, 100, 1, "a");
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].frames(), 200);

  const auto sixty = apply_clip_rules({}, 1800, 30, 1, "a");
  ASSERT_EQ(sixty.size(), 1u);
  EXPECT_DOUBLE_EQ(sixty[0].duration_seconds(), 60.0);

  const auto ninety = apply_clip_rules({}, 2700, 30, 1, "a");
  ASSERT_EQ(ninety.size(), 2u);
  EXPECT_DOUBLE_EQ(ninety[0].duration_seconds(), 45.0);
  EXPECT_DOUBLE_EQ(ninety[1].duration_seconds(), 45.0);
  EXPECT_EQ(ninety[0].end_frame, ninety[1].start_frame);

  EXPECT_TRUE(apply_clip_rules({}, 45, 30, 1, "a").empty());
}

TEST(ClipRules, SegmentsFollowBoundaries) {
  const std::vector<std::int64_t> b{30, 200, 260};
  const auto clips = apply_clip_rules(b, 400, 30, 1, "vid");
  ASSERT_EQ(clips.size(), 3u);  // [0,30) is 1 s and dropped
  EXPECT_EQ(clips[0], (Clip{"vid", 30, 200, 30, 1}));
  EXPECT_EQ(clips[1], (Clip{"vid", 200, 260, 30, 1}));
  EXPECT_EQ(clips[2], (Clip{"vid", 260, 400, 30, 1}));
}

TEST(ClipRules, RandomInputsRespectBounds) {
  std::mt19937 rng(23);
  for (int t = 0; t < 200; ++t) {
    const std::int64_t len = 1 + rng() % 10000;
    std::vector<std::int64_t> b;
    for (int i = 0; i < 6 && len > 1; ++i) b.push_back(1 + rng() % (len - 1));
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    const auto clips = apply_clip_rules(b, len, 24, 1, "x");
    std::int64_t prev_end = 0;
    for (const auto& c : clips) {
      EXPECT_GE(c.duration_seconds(), 2.0);
      EXPECT_LE(c.duration_seconds(), 60.0);
      EXPECT_GE(c.start_frame, prev_end);
      prev_end = c.end_frame;
    }
    EXPECT_LE(prev_end, len);
  }
}

TEST(Eval, RangeMidpoint) {
  EXPECT_EQ(range_to_midpoint(100, 110), 105);
  EXPECT_EQ(range_to_midpoint(10, 15), 12);
  EXPECT_EQ(range_to_midpoint(7, 7), 7);
}

TEST(Eval, Examples) {
  const std::vector<std::int64_t> pred{10, 50}, gt{11, 80};
  const auto r = eval_split(pred, gt, 2);
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_DOUBLE_EQ(r.f1, 0.5);
  EXPECT_EQ(r.tp, 1);
  EXPECT_EQ(r.fp, 1);
  EXPECT_EQ(r.fn, 1);

  const auto both_empty = eval_split({}, {}, 2);
  EXPECT_DOUBLE_EQ(both_empty.f1, 1.0);
  const std::vector<std::int64_t> one{5};
  EXPECT_DOUBLE_EQ(eval_split(one, {}, 2).f1, 0.0);
  EXPECT_DOUBLE_EQ(eval_split({}, one, 2).f1, 0.0);
}

TEST(Eval, PredictionMatchesOnlyOnce) {
  const std::vector<std::int64_t> pred{10}, gt{9, 11};
  const auto r = eval_split(pred, gt, 1);
  EXPECT_EQ(r.tp, 1);
  EXPECT_EQ(r.fn, 1);
}

TEST(Eval, GreedyMatchesExhaustiveOptimum) {
  std::mt19937 rng(31);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::int64_t> pred(rng() % 9), gt(rng() % 9);
    for (auto& v : pred) v = rng() % 40;
    for (auto& v : gt) v = rng() % 40;
    std::sort(pred.begin(), pred.end());
    std::sort(gt.begin(), gt.end());
    const std::int64_t tol = rng() % 4;
    EXPECT_EQ(eval_split(pred, gt, tol).tp, max_matching(pred, gt, tol));
  }
}

TEST(Eval, BoundaryFileFormats) {
  const auto dir = fs::path(CURATOR_TEST_TMP) / "splitter";
  fs::create_directories(dir);
  const auto path = (dir / "gt.jsonl").string();
  {
    std::ofstream out(path);
    out << "{\"frame\": 40}\n\n{\"start\": 10, \"end\": 15}\n{\"frame\": 3}\n";
  }
  EXPECT_EQ(load_boundary_file(path), (std::vector<std::int64_t>{3, 12, 40}));
  EXPECT_THROW(load_boundary_file((dir / "missing.jsonl").string()), std::exception);
}
