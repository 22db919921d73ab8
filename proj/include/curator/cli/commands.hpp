#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "curator/annotate/captioning.hpp"
#include "curator/cli/config.hpp"
#include "curator/dedup/embedding.hpp"
#include "curator/filters/scorer.hpp"
#include "curator/splitter/shot_detect.hpp"

namespace curator::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

/// Service clients resolved from the config: HTTP when an endpoint is set,
/// deterministic in-process stubs otherwise.
struct Services {
  std::shared_ptr<filters::ScorerClient> quality;
  std::shared_ptr<filters::ScorerClient> aesthetic;
  std::shared_ptr<dedup::EmbedderClient> embedder;
  std::shared_ptr<annotate::CaptionClient> captioner;
  std::shared_ptr<splitter::BoundaryDetectorClient> boundary;  // null unless neural
  static Services from_config(const Config& config);
};

struct CommandIo {
  std::ostream& out;
  std::ostream& err;
  std::optional<std::string> report_path;
  /// Writes `report` to report_path, or to `out` when none is set.
  void emit(const nlohmann::json& report) const;
};

int cmd_split(const Config& config, const Services& services, const CommandIo& io);
int cmd_filter(const Config& config, const Services& services, const CommandIo& io);
int cmd_annotate(const Config& config, const Services& services, const CommandIo& io);
int cmd_dedup(const Config& config, const Services& services, const CommandIo& io);
int cmd_shard(const Config& config, const Services& services, const CommandIo& io);
int cmd_run(const Config& config, const Services& services, bool simulate, const CommandIo& io);

int cmd_eval_split(const std::string& pred_path, const std::string& gt_path, std::int64_t tolerance,
                   const CommandIo& io);

struct SearchArgs {
  std::optional<std::string> query_clip;
  std::optional<std::string> vector_file;
  std::optional<std::string> text;
  std::size_t top_k = 10;
  std::optional<int> n_probe;  // default: all clusters
};
int cmd_search(const Config& config, const Services& services, const SearchArgs& args, const CommandIo& io);

/// Histogram detector over one y4m file, one {"frame": n} line per boundary.
int cmd_detect(const Config& config, const std::string& video, const std::string& out_path, const CommandIo& io);

/// Writes {dir}/{clip_id}.y4m for every manifest clip in `status`, batching
/// clips of one source into a single transcoder invocation. With no
/// transcoder.template configured the built-in trimmer is used.
int cmd_export(const Config& config, const std::string& dir, const std::string& status, const CommandIo& io);

int cmd_schedule(const std::string& pipeline_path, const std::string& nodes_path, const CommandIo& io);
int cmd_simulate(const std::string& pipeline_path, const std::string& nodes_path, std::int64_t items,
                 std::uint64_t seed, bool exponential, const CommandIo& io);

/// Clip id used in the manifest: {source}_{start:06d}_{end:06d}.
std::string clip_id_for(const std::string& source_id, std::int64_t start, std::int64_t end);

}  // namespace curator::cli
