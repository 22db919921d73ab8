#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace curator::shard {

/// Lifecycle of a clip. Forward edges only:
///   split -> filtered_out | annotated,  annotated -> deduped_out | sharded.
enum class ClipStatus { Split, FilteredOut, Annotated, DedupedOut, Sharded };

std::string_view to_string(ClipStatus s);
ClipStatus parse_status(std::string_view s);
bool is_terminal(ClipStatus s);
/// True for a forward edge or a same-status update.
bool can_transition(ClipStatus from, ClipStatus to);

struct ManifestEntry {
  std::string clip_id;
  std::string source_id;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  int fps_num = 30;
  int fps_den = 1;
  int width = 0;
  int height = 0;
  ClipStatus status = ClipStatus::Split;
  std::string reason;  // required for filtered_out / deduped_out
  std::map<std::string, double> scores;
  std::set<std::string> tags;
  std::vector<std::string> caption_refs;
  std::string embedding_ref;
  std::string bucket;
  std::string shard_ref;

  double duration_seconds() const {
    return static_cast<double>(end_frame - start_frame) * fps_den / fps_num;
  }
  bool operator==(const ManifestEntry&) const = default;

  nlohmann::json to_json() const;
  /// Throws std::invalid_argument on missing or mistyped fields.
  static ManifestEntry from_json(const nlohmann::json& j);
};

class InvalidTransition : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct ManifestFilter {
  std::optional<ClipStatus> status;
  std::optional<std::string> bucket;
  std::optional<std::string> tag;
  std::optional<std::string> source_id;

  bool matches(const ManifestEntry& e) const;
};

struct ScanResult {
  std::vector<ManifestEntry> entries;  // latest record per clip, sorted by clip_id
  std::size_t corrupt_lines = 0;
  std::vector<std::string> warnings;
};

/// Latest-record-wins fold of a line-delimited JSON manifest file. A missing
/// file scans as empty. Undecodable lines are skipped and counted.
ScanResult scan_manifest(const std::string& path, const ManifestFilter& filter = {});

/// Single-writer append-only store. Appends are serialized and flushed;
/// readers may scan the file concurrently.
class ManifestStore {
 public:
  explicit ManifestStore(std::string path);

  /// Throws InvalidTransition for a backward status move or a missing reason.
  void append(const ManifestEntry& entry);
  ScanResult scan(const ManifestFilter& filter = {}) const;
  std::optional<ManifestEntry> get(const std::string& clip_id) const;
  std::size_t size() const;
  std::size_t corrupt_lines() const { return corrupt_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::map<std::string, ManifestEntry> latest_;
  std::size_t corrupt_ = 0;
};

}  // namespace curator::shard
