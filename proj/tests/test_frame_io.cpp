#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "curator/frame_io/color.hpp"
#include "curator/frame_io/sampling.hpp"
#include "curator/frame_io/transcode.hpp"
#include "curator/frame_io/y4m.hpp"

using namespace curator::frame_io;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::path(CURATOR_TEST_TMP) / "frame_io" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<Frame> random_frames(const StreamHeader& h, int n, std::mt19937& rng) {
  std::vector<Frame> frames;
  for (int i = 0; i < n; ++i) {
    Frame f;
    f.pts_index = i;
    f.data.resize(h.frame_bytes());
    for (auto& b : f.data) b = static_cast<std::uint8_t>(rng());
    frames.push_back(std::move(f));
  }
  return frames;
}

Y4mError::Kind error_kind(const std::string& bytes) {
  try {
    parse_y4m_header(bytes);
  } catch (const Y4mError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << bytes;
  return Y4mError::Kind::InvalidHeader;
}

}  // namespace

TEST(Y4mHeader, ParsesStandardLine) {
  const auto p = parse_y4m_header("YUV4MPEG2 W640 H480 F30:1 Ip A1:1 C420jpeg\nFRAME\n");
  EXPECT_EQ(p.header.width, 640);
  EXPECT_EQ(p.header.height, 480);
  EXPECT_EQ(p.header.fps_num, 30);
  EXPECT_EQ(p.header.fps_den, 1);
  EXPECT_EQ(p.header.chroma, Chroma::C420);
  EXPECT_FALSE(p.header.frame_count.has_value());
  EXPECT_EQ(p.payload_offset, std::string("YUV4MPEG2 W640 H480 F30:1 Ip A1:1 C420jpeg\n").size());
  EXPECT_EQ(p.header.frame_bytes(), 460800u);
}

TEST(Y4mHeader, FrameBytesFor444) {
  const auto p = parse_y4m_header("YUV4MPEG2 W5 H3 F25:1 C444\n");
  EXPECT_EQ(p.header.chroma, Chroma::C444);
  EXPECT_EQ(p.header.frame_bytes(), 45u);
}

TEST(Y4mHeader, Errors) {
  EXPECT_EQ(error_kind("YUV4MPEG2 W640 H480 Ip C420jpeg\n"), Y4mError::Kind::MissingField);
  EXPECT_EQ(error_kind("YUV4MPEG2 H480 F30:1\n"), Y4mError::Kind::MissingField);
  EXPECT_EQ(error_kind("RIFF W640 H480 F30:1\n"), Y4mError::Kind::BadMagic);
  EXPECT_EQ(error_kind("YUV4MPEG2 W640 H480 F30:1 C422\n"), Y4mError::Kind::UnsupportedChroma);
  EXPECT_EQ(error_kind("YUV4MPEG2 W641 H480 F30:1 C420jpeg\n"), Y4mError::Kind::InvalidHeader);
  EXPECT_EQ(error_kind("YUV4MPEG2 W640 H480 F30:0\n"), Y4mError::Kind::InvalidHeader);
}

TEST(Y4mHeader, LengthAndExtensionTokens) {
  const auto p = parse_y4m_header("YUV4MPEG2 W4 H2 F24000:1001 Ip A1:1 C420jpeg XLENGTH=7 XCOLORRANGE=FULL\n");
  EXPECT_EQ(p.header.frame_count, 7);
  ASSERT_EQ(p.header.extensions.size(), 1u);
  EXPECT_EQ(p.header.extensions[0], "COLORRANGE=FULL");
  EXPECT_EQ(p.header.to_line(), "YUV4MPEG2 W4 H2 F24000:1001 Ip A1:1 C420jpeg XLENGTH=7 XCOLORRANGE=FULL\n");
}

TEST(Y4mReader, YieldsFramesInOrder) {
  StreamHeader h;
  h.width = 4;
  h.height = 2;
  h.fps_num = 30;
  std::mt19937 rng(1);
  const auto frames = random_frames(h, 3, rng);
  std::istringstream in(write_y4m(h, frames));
  Y4mReader reader(in);
  std::vector<std::int64_t> pts;
  for (const auto& f : reader) {
    EXPECT_EQ(f.data.size(), h.frame_bytes());
    EXPECT_EQ(f.data, frames[pts.size()].data);
    pts.push_back(f.pts_index);
  }
  EXPECT_EQ(pts, (std::vector<std::int64_t>{0, 1, 2}));
}

TEST(Y4mReader, TruncatedPayloadAfterLastCompleteFrame) {
  StreamHeader h;
  h.width = 4;
  h.height = 2;
  h.fps_num = 30;
  std::mt19937 rng(2);
  auto bytes = write_y4m(h, random_frames(h, 2, rng));
  bytes.resize(bytes.size() - 3);
  std::istringstream in(bytes);
  Y4mReader reader(in);
  ASSERT_TRUE(reader.next().has_value());
  try {
    reader.next();
    FAIL() << "expected TruncatedFrame";
  } catch (const Y4mError& e) {
    EXPECT_EQ(e.kind(), Y4mError::Kind::TruncatedFrame);
  }
}

TEST(Y4mReader, DeclaredLengthMustBeMet) {
  StreamHeader h;
  h.width = 2;
  h.height = 2;
  h.fps_num = 30;
  std::mt19937 rng(3);
  const auto frames = random_frames(h, 2, rng);
  h.frame_count = 3;
  std::ostringstream out;
  out << h.to_line();
  for (const auto& f : frames) {
    out << "FRAME\n";
    out.write(reinterpret_cast<const char*>(f.data.data()), static_cast<std::streamsize>(f.data.size()));
  }
  std::istringstream in(out.str());
  Y4mReader reader(in);
  reader.next();
  reader.next();
  EXPECT_THROW(reader.next(), Y4mError);
}

TEST(Y4mRoundTrip, ByteIdenticalOnGeneratedStreams) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    StreamHeader h;
    h.chroma = trial % 3 == 0 ? Chroma::C444 : Chroma::C420;
    h.chroma_tag = h.chroma == Chroma::C444 ? "444" : (trial % 2 ? "420jpeg" : "420mpeg2");
    h.width = 2 * static_cast<int>(1 + rng() % 12);
    h.height = 2 * static_cast<int>(1 + rng() % 9);
    h.fps_num = static_cast<int>(1 + rng() % 60000);
    h.fps_den = static_cast<int>(1 + rng() % 1001);
    h.interlace = trial % 4 == 0 ? "t" : "p";
    h.pixel_aspect = trial % 5 == 0 ? "0:0" : "1:1";
    const int n = static_cast<int>(rng() % 6);
    if (trial % 2) h.frame_count = n;
    if (trial % 7 == 0) h.extensions.push_back("COLORRANGE=FULL");
    const auto bytes = write_y4m(h, random_frames(h, n, rng));

    std::istringstream in(bytes);
    Y4mReader reader(in);
    std::vector<Frame> back;
    for (auto& f : reader) back.push_back(f);
    ASSERT_EQ(static_cast<int>(back.size()), n);
    EXPECT_EQ(write_y4m(reader.header(), back), bytes) << "trial " << trial;
  }
}

TEST(Y4mFile, RangeReadMatchesSlice) {
  const auto dir = scratch("range");
  StreamHeader h;
  h.width = 4;
  h.height = 4;
  h.fps_num = 25;
  std::mt19937 rng(9);
  const auto frames = random_frames(h, 10, rng);
  const auto path = (dir / "v.y4m").string();
  write_y4m_file(path, h, frames);
  const auto v = read_y4m_range(path, 3, 7);
  ASSERT_EQ(v.frames.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(v.frames[i].data, frames[3 + i].data);
  EXPECT_EQ(read_y4m_file(path).frames.size(), 10u);
}

TEST(Hsv, ReferenceColours) {
  auto red = rgb_to_hsv(255, 0, 0);
  EXPECT_DOUBLE_EQ(red.h, 0.0);
  EXPECT_DOUBLE_EQ(red.s, 1.0);
  EXPECT_DOUBLE_EQ(red.v, 1.0);
  auto grey = rgb_to_hsv(128, 128, 128);
  EXPECT_DOUBLE_EQ(grey.h, 0.0);
  EXPECT_DOUBLE_EQ(grey.s, 0.0);
  EXPECT_DOUBLE_EQ(grey.v, 128.0 / 255.0);
  auto cyan = rgb_to_hsv(0, 255, 255);
  EXPECT_DOUBLE_EQ(cyan.h, 180.0);
  EXPECT_DOUBLE_EQ(cyan.s, 1.0);
  EXPECT_DOUBLE_EQ(cyan.v, 1.0);
}

TEST(Hsv, RangesOverAllPrimaries) {
  for (int r = 0; r < 256; r += 15) {
    for (int g = 0; g < 256; g += 15) {
      for (int b = 0; b < 256; b += 15) {
        const auto c = rgb_to_hsv(r, g, b);
        EXPECT_GE(c.h, 0.0);
        EXPECT_LT(c.h, 360.0);
        EXPECT_GE(c.s, 0.0);
        EXPECT_LE(c.s, 1.0);
        EXPECT_GE(c.v, 0.0);
        EXPECT_LE(c.v, 1.0);
      }
    }
  }
}

TEST(Color, FlatColourSurvivesYuvRoundTrip) {
  RgbImage img(8, 6);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 8; ++x) {
      auto* p = img.pixel(x, y);
      p[0] = 200, p[1] = 40, p[2] = 90;
    }
  }
  StreamHeader h;
  h.width = 8;
  h.height = 6;
  h.fps_num = 30;
  const auto back = to_rgb(from_rgb(img, Chroma::C420), h);
  for (std::size_t i = 0; i < img.data.size(); ++i) EXPECT_NEAR(back.data[i], img.data[i], 2);
}

TEST(Sampling, Examples) {
  EXPECT_EQ(sample_uniform_frames(8, 8), (std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6, 7}));
  EXPECT_EQ(sample_uniform_frames(9, 3), (std::vector<std::int64_t>{0, 4, 8}));
  EXPECT_EQ(sample_uniform_frames(100, 8), (std::vector<std::int64_t>{0, 14, 28, 42, 57, 71, 85, 99}));
  EXPECT_EQ(sample_uniform_frames(5, 1), (std::vector<std::int64_t>{0}));
  EXPECT_EQ(sample_uniform_frames(3, 8), (std::vector<std::int64_t>{0, 1, 2}));
}

TEST(Sampling, StrictlyIncreasingWithEndpoints) {
  for (std::int64_t N = 2; N <= 120; ++N) {
    for (std::int64_t n = 2; n <= std::min<std::int64_t>(N, 20); ++n) {
      const auto idx = sample_uniform_frames(N, n);
      ASSERT_EQ(static_cast<std::int64_t>(idx.size()), n);
      EXPECT_EQ(idx.front(), 0);
      EXPECT_EQ(idx.back(), N - 1);
      for (std::size_t i = 1; i < idx.size(); ++i) {
        ASSERT_LT(idx[i - 1], idx[i]);
        // round-half-up of i*(N-1)/(n-1), checked in floating point.
        EXPECT_EQ(idx[i], static_cast<std::int64_t>(std::floor(static_cast<double>(i) * (N - 1) / (n - 1) + 0.5)));
      }
    }
  }
}

TEST(Transcode, TemplateValidation) {
  TranscoderClient missing{"ffmpeg -i {input} -ss {start} -to {end}"};
  EXPECT_THROW(missing.validate_template(), TemplateError);
  TranscoderClient extra{"tool {input} {start} {end} {output} {preset}"};
  TranscodeJob job{"s", "in.y4m", {{0, 10}}, {"a.y4m"}};
  EXPECT_THROW(extra.render(job), TemplateError);
  TranscoderClient ok{"tool {input} {start} {end} {output}"};
  job.ranges.push_back({10, 20});
  job.outputs.push_back("b.y4m");
  EXPECT_EQ(ok.render(job), "tool in.y4m 0,10 10,20 a.y4m,b.y4m");
}

TEST(Transcode, JobValidation) {
  EXPECT_THROW((TranscodeJob{"s", "in", {{5, 5}}, {"o"}}.validate()), std::invalid_argument);
  EXPECT_THROW((TranscodeJob{"s", "in", {{0, 10}, {5, 15}}, {"a", "b"}}.validate()), std::invalid_argument);
  TranscodeJob beyond{"s", "in", {{0, 10}}, {"a"}};
  beyond.source_length = 8;
  EXPECT_THROW(beyond.validate(), std::invalid_argument);
}

TEST(Transcode, ClipsOfOneSourceShareAnInvocation) {
  const auto dir = scratch("batch");
  const auto log = (dir / "calls.log").string();
  TranscoderClient client{"echo {input} {start} {end} {output} >> " + log, 2};
  std::vector<TranscodeJob> jobs{
      {"a", "a.y4m", {{0, 10}}, {"a0"}},
      {"a", "a.y4m", {{20, 30}}, {"a2"}},
      {"a", "a.y4m", {{10, 20}}, {"a1"}},
      {"b", "b.y4m", {{0, 5}}, {"b0"}},
  };
  const auto outcome = run_transcode(jobs, client);
  EXPECT_EQ(outcome.report.invocations, 2u);
  EXPECT_EQ(outcome.report.completed_sources, 2u);
  EXPECT_EQ(outcome.results.size(), 4u);
  std::ifstream in(log);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_NE(std::find(lines.begin(), lines.end(), "a.y4m 0,10,20 10,20,30 a0,a1,a2"), lines.end());
}

TEST(Transcode, EmptyJobListAndFailures) {
  const auto empty = run_transcode({}, TranscoderClient{"x {input} {start} {end} {output}"});
  EXPECT_EQ(empty.report.invocations, 0u);
  EXPECT_EQ(empty.report.videos_per_second, 0.0);
  EXPECT_TRUE(empty.results.empty());

  const auto failed = run_transcode({{"a", "a.y4m", {{0, 1}}, {"o"}}},
                                    TranscoderClient{"exit 3 # {input} {start} {end} {output}"});
  ASSERT_EQ(failed.results.size(), 1u);
  EXPECT_EQ(failed.results[0].status, TranscodeStatus::ProcessFailure);
  EXPECT_EQ(failed.results[0].exit_code, 3);
  EXPECT_EQ(failed.report.failed_sources, 1u);
}

TEST(Transcode, BuiltInTrimmerCutsRanges) {
  const auto dir = scratch("trim");
  StreamHeader h;
  h.width = 4;
  h.height = 2;
  h.fps_num = 30;
  std::mt19937 rng(5);
  const auto frames = random_frames(h, 12, rng);
  const auto src = (dir / "src.y4m").string();
  write_y4m_file(src, h, frames);
  trim_y4m(src, {{8, 12}, {2, 5}}, {(dir / "late.y4m").string(), (dir / "early.y4m").string()});
  const auto early = read_y4m_file((dir / "early.y4m").string());
  const auto late = read_y4m_file((dir / "late.y4m").string());
  ASSERT_EQ(early.frames.size(), 3u);
  ASSERT_EQ(late.frames.size(), 4u);
  EXPECT_EQ(early.header.frame_count, 3);
  EXPECT_EQ(early.frames[0].data, frames[2].data);
  EXPECT_EQ(late.frames[3].data, frames[11].data);
}
