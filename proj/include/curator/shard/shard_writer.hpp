#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curator/shard/bucket.hpp"
#include "curator/shard/manifest.hpp"

namespace curator::shard {

/// Supplies the frame payload (a y4m stream) for a clip.
class PayloadSource {
 public:
  virtual ~PayloadSource() = default;
  virtual std::optional<std::string> fetch(const ManifestEntry& entry) = 0;
};

class PayloadMissing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ShardMemberRef {
  std::string clip_id;
  std::uint64_t offset = 0;  // header offset of the clip's first member
  std::uint64_t length = 0;  // bytes spanned by the clip's members
};

struct ShardSpec {
  std::string bucket;
  int shard_index = 0;
  std::string path;  // relative to out_dir
  std::vector<std::string> entries;
  std::vector<ShardMemberRef> members;
  std::uint64_t byte_size = 0;
};

struct ShardWriteResult {
  std::vector<ShardSpec> shards;
  std::vector<std::string> warnings;
  std::string index_path;
};

/// Bytes one clip adds to a shard: its metadata and payload members.
std::uint64_t clip_footprint(const std::string& metadata_json, std::uint64_t payload_bytes);

/// Packs `entries` (all of one bucket, given by their `bucket` field) into
/// {out_dir}/{bucket}/shard-%06d.tar. Each clip contributes {clip_id}.json
/// then {clip_id}.y4m. A shard closes when the next clip would push it past
/// max_bytes; a clip larger than max_bytes gets its own shard and a warning.
std::vector<ShardSpec> write_bucket_shards(std::span<const ManifestEntry> entries,
                                           PayloadSource& source, std::uint64_t max_bytes,
                                           const std::string& out_dir,
                                           std::vector<std::string>* warnings = nullptr);

/// Groups entries by bucket, writes every bucket's shards and
/// {out_dir}/index.json: {"shards":[{"path","bucket","entries":[{"clip_id","offset","length"}]}]}.
ShardWriteResult write_shards(std::span<const ManifestEntry> entries, PayloadSource& source,
                              std::uint64_t max_bytes, const std::string& out_dir);

/// Reads a shard back into (metadata, payload) per clip, in archive order.
struct ShardSample {
  std::string clip_id;
  ManifestEntry metadata;
  std::string payload;
};
std::vector<ShardSample> read_shard(const std::string& path);

}  // namespace curator::shard
