#pragma once

// Per-clip and per-corpus stage steps shared by the stage commands and the
// streaming run.

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "curator/cli/commands.hpp"
#include "curator/dedup/duplicates.hpp"
#include "curator/filters/mlp.hpp"
#include "curator/filters/verdict.hpp"
#include "curator/frame_io/y4m.hpp"
#include "curator/shard/manifest.hpp"
#include "curator/shard/shard_writer.hpp"

namespace curator::cli::detail {

inline constexpr const char* kPassedTag = "passed_filters";
inline constexpr const char* kKeptTag = "dedup_kept";
inline constexpr const char* kEmbeddingsFile = "embeddings.jsonl";
inline constexpr const char* kCaptionsFile = "captions.jsonl";
inline constexpr const char* kSearchIndexFile = "search.idx";

std::string source_path(const Config& config, const std::string& source_id);
/// Stems of *.y4m files in the input directory, sorted. Missing dir -> ConfigError.
std::vector<std::string> list_sources(const Config& config);
std::set<std::string> split_sources(const shard::ScanResult& scan);

/// Detects shots and applies the clip rules; entries are in status split.
std::vector<shard::ManifestEntry> split_source(const Config& config, const Services& services,
                                               const std::string& source_id);

frame_io::Video load_clip(const Config& config, const shard::ManifestEntry& entry);
std::vector<frame_io::RgbImage> sample_rgb(const frame_io::Video& clip, std::int64_t count = 8);

filters::FilterVerdict motion_verdict(const Config& config, const shard::ManifestEntry& entry,
                                      const frame_io::Video& clip);

struct Classifiers {
  std::optional<filters::MlpWeights> text;
  std::optional<filters::MlpWeights> type;
  static Classifiers load(const Config& config);
};

/// Text-overlay and video-type checks on a normalized embedding. Records
/// scores and a "type:<label>" tag on the verdict.
void classify_embedding(const Config& config, const Classifiers& classifiers,
                        std::span<const float> embedding, filters::FilterVerdict& verdict);

/// Quality and aesthetic scores plus the normalized embedding for one clip.
struct ClipFeatures {
  double quality = 0.0;
  double aesthetic = 0.0;
  std::vector<float> embedding;
};
ClipFeatures score_and_embed(const Config& config, const Services& services,
                             const shard::ManifestEntry& entry, const frame_io::Video& clip);

/// Append-only JSONL of {"clip_id", "vector"}; the latest line per clip wins.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::string path);
  void put(const std::string& clip_id, const std::vector<float>& vector);
  std::optional<std::vector<float>> get(const std::string& clip_id) const;
  std::string ref(const std::string& clip_id) const;
  std::size_t size() const;

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<float>> vectors_;
};

class CaptionStore {
 public:
  explicit CaptionStore(std::string path) : path_(std::move(path)) {}
  /// Appends and returns the refs ("captions.jsonl#clip:window").
  std::vector<std::string> put(const std::vector<annotate::Caption>& captions);

 private:
  std::string path_;
  std::mutex mu_;
};

std::vector<annotate::CaptionRequest> caption_requests(const Config& config, const shard::ManifestEntry& entry);
annotate::RetryPolicy retry_policy(const Config& config);

/// Reads clip frames from the source file for caption requests.
annotate::FrameProvider frame_provider(const Config& config,
                                       std::map<std::string, shard::ManifestEntry> entries);

struct DedupOutcome {
  std::set<std::string> kept;
  std::map<std::string, std::string> removed;  // clip -> representative
  std::size_t groups = 0;
};
DedupOutcome run_dedup(const Config& config, const std::vector<shard::ManifestEntry>& entries,
                       const EmbeddingStore& store);

/// Rebuilds work_dir/search.idx over every kept or sharded clip with an embedding.
std::size_t rebuild_search_index(const Config& config, const shard::ScanResult& scan,
                                 const EmbeddingStore& store);

class ClipPayloadSource : public shard::PayloadSource {
 public:
  explicit ClipPayloadSource(const Config& config) : config_(config) {}
  std::optional<std::string> fetch(const shard::ManifestEntry& entry) override;

 private:
  const Config& config_;
};

/// Writes shards for `entries` into a fresh batch directory and returns the
/// entries updated to status sharded with bucket and shard_ref.
std::vector<shard::ManifestEntry> shard_entries(const Config& config, std::vector<shard::ManifestEntry> entries,
                                                std::vector<std::string>& warnings);

nlohmann::json status_counts(const shard::ScanResult& scan);

}  // namespace curator::cli::detail
