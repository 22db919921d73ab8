#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "curator/filters/motion.hpp"
#include "curator/orchestrator/resources.hpp"

namespace curator::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Profile { Pretrain, Finetune };
Profile parse_profile(const std::string& s);
std::string_view to_string(Profile p);

struct SplitConfig {
  double threshold = 0.05;
  std::int64_t min_scene_len = 1;
  int bins = 16;
  double min_clip_seconds = 2.0;
  double max_clip_seconds = 60.0;
  std::string detector = "histogram";  // or "neural" (needs endpoints.boundary)
};

struct FilterConfig {
  filters::MotionThresholds motion;
  int motion_pairs = 8;
  double quality_fraction = 0.15;
  double aesthetic_threshold = 3.5;
  std::string text_mlp;  // weights file; empty disables the overlay filter
  double text_threshold = 0.5;
  std::string type_mlp;  // weights file with labels; empty disables typing
  std::vector<std::string> excluded_types;
  bool resample = false;
  std::uint64_t resample_seed = 0;
};

struct AnnotateConfig {
  std::string prompt;
  unsigned max_inflight = 4;
  int max_retries = 2;
  int backoff_ms = 50;
};

struct DedupConfig {
  double eps = 0.05;
  int k = 8;
  std::size_t block = 256;
  int max_iters = 50;
  std::uint64_t seed = 0;
  int embedding_dim = 512;
};

struct ShardConfig {
  std::uint64_t max_bytes = 64ull << 20;
};

struct TranscoderConfig {
  std::string command_template;  // {input} {start} {end} {output}; empty = built-in trimmer
  unsigned max_parallel = 2;
};

struct Endpoints {
  std::string caption, embed, embed_text, quality, aesthetic, boundary;  // empty = in-process stub
};

struct PipelineConfig {
  std::vector<orchestrator::NodeSpec> nodes;
  nlohmann::json stage_overrides = nlohmann::json::object();  // by stage name
  std::uint64_t seed = 0;
};

struct Config {
  std::string input_dir = "videos";
  std::string manifest = "manifest.jsonl";
  std::string work_dir = "work";    // embeddings, captions, search index
  std::string shard_dir = "shards";
  Profile profile = Profile::Pretrain;
  SplitConfig split;
  FilterConfig filter;
  AnnotateConfig annotate;
  DedupConfig dedup;
  ShardConfig shard;
  TranscoderConfig transcoder;
  Endpoints endpoints;
  PipelineConfig pipeline;

  /// Throws ConfigError naming the first out-of-domain value.
  void validate() const;
  nlohmann::json to_json() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

/// Defaults, then the file (if any), then the profile overlay, then
/// CURATOR_*_ENDPOINT variables. The finetune overlay is the file's
/// "profiles.finetune" object, or a built-in stricter preset when absent;
/// it must not loosen any pretrain threshold.
Config load_config(const std::optional<std::string>& path, Profile profile,
                   const EnvLookup& env = process_env);
Config config_from_json(const nlohmann::json& doc, Profile profile, const EnvLookup& env = process_env);

}  // namespace curator::cli
