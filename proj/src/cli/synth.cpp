#include "curator/cli/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "curator/common/hash.hpp"
#include "curator/frame_io/color.hpp"

namespace curator::cli {

namespace {

void hsv_to_rgb(double h, double s, double v, std::uint8_t* out) {
  const double c = v * s;
  const double hp = std::fmod(h, 360.0) / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = v - c;
  out[0] = static_cast<std::uint8_t>(std::lround((r + m) * 255.0));
  out[1] = static_cast<std::uint8_t>(std::lround((g + m) * 255.0));
  out[2] = static_cast<std::uint8_t>(std::lround((b + m) * 255.0));
}

}  // namespace

frame_io::Video make_synthetic_video(const SynthSpec& spec) {
  if (spec.width < 2 || spec.height < 2 || spec.width % 2 || spec.height % 2 || spec.frames < 1) {
    throw std::invalid_argument("synthetic video needs even dimensions and at least one frame");
  }
  for (std::size_t i = 0; i < spec.cuts.size(); ++i) {
    if (spec.cuts[i] <= 0 || spec.cuts[i] >= spec.frames || (i > 0 && spec.cuts[i] <= spec.cuts[i - 1])) {
      throw std::invalid_argument("synthetic cuts must be ascending and inside the video");
    }
  }
  frame_io::Video video;
  auto& h = video.header;
  h.width = spec.width;
  h.height = spec.height;
  h.fps_num = spec.fps_num;
  h.fps_den = spec.fps_den;
  h.frame_count = spec.frames;

  // Texture is cyclic in x so panning keeps each shot's histogram constant.
  std::vector<double> texture(static_cast<std::size_t>(spec.width) * spec.height);
  std::uint64_t state = spec.seed ^ 0x5EEDull;
  for (auto& t : texture) t = 0.45 + 0.55 * (static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53);

  std::size_t shot = 0;
  for (std::int64_t f = 0; f < spec.frames; ++f) {
    while (shot < spec.cuts.size() && spec.cuts[shot] <= f) ++shot;
    // Consecutive shots sit 150 degrees apart on the hue wheel.
    const double hue = std::fmod(static_cast<double>(spec.seed % 360) + 150.0 * shot, 360.0);
    frame_io::RgbImage img(spec.width, spec.height);
    const std::int64_t shift = f * spec.pan_px;
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const auto sx = static_cast<int>(((x - shift) % spec.width + spec.width) % spec.width);
        hsv_to_rgb(hue, 0.85, texture[static_cast<std::size_t>(y) * spec.width + sx], img.pixel(x, y));
      }
    }
    video.frames.push_back(frame_io::from_rgb(img, h.chroma, f));
  }
  return video;
}

std::vector<SynthCorpusItem> write_synthetic_corpus(const std::string& dir, int count, int max_cuts,
                                                    std::uint64_t seed, std::int64_t min_shot_frames,
                                                    std::int64_t max_shot_frames, int width, int height,
                                                    int fps) {
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(seed);
  std::vector<SynthCorpusItem> out;
  for (int i = 0; i < count; ++i) {
    const int cuts = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(max_cuts)));
    SynthSpec spec;
    spec.width = width;
    spec.height = height;
    spec.fps_num = fps;
    spec.seed = seed * 1000003ull + static_cast<std::uint64_t>(i);
    std::int64_t pos = 0;
    for (int s = 0; s <= cuts; ++s) {
      pos += min_shot_frames +
             static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(max_shot_frames - min_shot_frames + 1)));
      if (s < cuts) spec.cuts.push_back(pos);
    }
    spec.frames = pos;
    const auto video = make_synthetic_video(spec);

    char name[32];
    std::snprintf(name, sizeof name, "synth_%03d", i);
    SynthCorpusItem item;
    item.source_id = name;
    item.path = (std::filesystem::path(dir) / (std::string(name) + ".y4m")).string();
    item.gt_path = (std::filesystem::path(dir) / (std::string(name) + ".gt.jsonl")).string();
    item.cuts = spec.cuts;
    frame_io::write_y4m_file(item.path, video.header, video.frames);
    std::ofstream gt(item.gt_path);
    for (auto c : spec.cuts) gt << "{\"frame\":" << c << "}\n";
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace curator::cli
