#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curator/frame_io/y4m.hpp"

namespace curator::cli {

/// A panning random texture per shot, each shot in its own hue, so hard
/// cuts are visible to the histogram detector and every shot has motion.
struct SynthSpec {
  int width = 96;
  int height = 54;
  int fps_num = 10;
  int fps_den = 1;
  std::int64_t frames = 100;
  std::vector<std::int64_t> cuts;  // first frames of new shots, ascending, in (0, frames)
  int pan_px = 2;                  // horizontal shift per frame
  std::uint64_t seed = 0;
};

frame_io::Video make_synthetic_video(const SynthSpec& spec);

struct SynthCorpusItem {
  std::string source_id;
  std::string path;                // y4m
  std::string gt_path;             // boundary JSONL, one {"frame": n} per cut
  std::vector<std::int64_t> cuts;
};

/// Writes `count` videos with 1..max_cuts cuts into dir as synth_%03d.y4m
/// plus synth_%03d.gt.jsonl. Shots are at least min_shot_frames long.
std::vector<SynthCorpusItem> write_synthetic_corpus(const std::string& dir, int count, int max_cuts,
                                                    std::uint64_t seed, std::int64_t min_shot_frames = 25,
                                                    std::int64_t max_shot_frames = 45, int width = 96,
                                                    int height = 54, int fps = 10);

}  // namespace curator::cli
