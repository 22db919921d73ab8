#include "curator/shard/shard_writer.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "curator/shard/tar.hpp"

namespace fs = std::filesystem;

namespace curator::shard {

std::uint64_t clip_footprint(const std::string& metadata_json, std::uint64_t payload_bytes) {
  return tar_member_size(metadata_json.size()) + tar_member_size(payload_bytes);
}

std::vector<ShardSpec> write_bucket_shards(std::span<const ManifestEntry> entries,
                                           PayloadSource& source, std::uint64_t max_bytes,
                                           const std::string& out_dir,
                                           std::vector<std::string>* warnings) {
  std::vector<ShardSpec> shards;
  if (entries.empty()) return shards;
  const std::string bucket = entries.front().bucket;
  if (bucket.empty()) throw std::invalid_argument("write_shards: entry without bucket");
  for (const auto& e : entries) {
    if (e.bucket != bucket) throw std::invalid_argument("write_shards: mixed buckets in one call");
  }
  const fs::path dir = fs::path(out_dir) / bucket;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  std::optional<TarWriter> writer;
  auto open_next = [&] {
    ShardSpec spec;
    spec.bucket = bucket;
    spec.shard_index = static_cast<int>(shards.size());
    char name[32];
    std::snprintf(name, sizeof name, "shard-%06d.tar", spec.shard_index);
    spec.path = (fs::path(bucket) / name).string();
    shards.push_back(std::move(spec));
    writer.emplace((fs::path(out_dir) / shards.back().path).string());
  };
  auto close_current = [&] {
    if (writer) shards.back().byte_size = writer->close();
    writer.reset();
  };

  for (const auto& e : entries) {
    auto payload = source.fetch(e);
    if (!payload) throw PayloadMissing("write_shards: no payload for " + e.clip_id);
    const std::string meta = e.to_json().dump();
    const std::uint64_t footprint = clip_footprint(meta, payload->size());

    if (writer && !shards.back().entries.empty() &&
        writer->bytes_written() + footprint + kTarTrailer > max_bytes) {
      close_current();
    }
    if (!writer) open_next();
    if (footprint + kTarTrailer > max_bytes && warnings) {
      warnings->push_back("clip " + e.clip_id + " (" + std::to_string(footprint) +
                          " bytes) exceeds max shard size " + std::to_string(max_bytes));
    }
    auto& spec = shards.back();
    const std::uint64_t at = writer->add(e.clip_id + ".json", meta);
    writer->add(e.clip_id + ".y4m", *payload);
    spec.entries.push_back(e.clip_id);
    spec.members.push_back({e.clip_id, at, footprint});
  }
  close_current();
  return shards;
}

ShardWriteResult write_shards(std::span<const ManifestEntry> entries, PayloadSource& source,
                              std::uint64_t max_bytes, const std::string& out_dir) {
  std::map<std::string, std::vector<ManifestEntry>> by_bucket;
  for (const auto& e : entries) by_bucket[e.bucket].push_back(e);

  ShardWriteResult result;
  for (const auto& [bucket, group] : by_bucket) {
    auto shards = write_bucket_shards(group, source, max_bytes, out_dir, &result.warnings);
    std::move(shards.begin(), shards.end(), std::back_inserter(result.shards));
  }

  nlohmann::json index;
  auto& arr = index["shards"] = nlohmann::json::array();
  for (const auto& s : result.shards) {
    nlohmann::json js{{"path", s.path}, {"bucket", s.bucket}, {"entries", nlohmann::json::array()}};
    for (const auto& m : s.members) {
      js["entries"].push_back({{"clip_id", m.clip_id}, {"offset", m.offset}, {"length", m.length}});
    }
    arr.push_back(std::move(js));
  }
  fs::create_directories(out_dir);
  result.index_path = (fs::path(out_dir) / "index.json").string();
  std::ofstream out(result.index_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + result.index_path);
  out << index.dump(2) << '\n';
  return result;
}

std::vector<ShardSample> read_shard(const std::string& path) {
  const auto members = read_tar(path);
  std::vector<ShardSample> samples;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& m = members[i];
    const auto dot = m.name.rfind('.');
    const std::string base = m.name.substr(0, dot);
    const std::string ext = dot == std::string::npos ? "" : m.name.substr(dot + 1);
    if (ext == "json") {
      ShardSample s;
      s.clip_id = base;
      s.metadata = ManifestEntry::from_json(nlohmann::json::parse(m.data));
      samples.push_back(std::move(s));
    } else if (ext == "y4m") {
      if (samples.empty() || samples.back().clip_id != base) {
        throw std::runtime_error("shard: payload " + m.name + " not adjacent to its metadata");
      }
      samples.back().payload = m.data;
    }
  }
  return samples;
}

}  // namespace curator::shard
