#include "curator/shard/manifest.hpp"

#include <fstream>

namespace curator::shard {

std::string_view to_string(ClipStatus s) {
  switch (s) {
    case ClipStatus::Split: return "split";
    case ClipStatus::FilteredOut: return "filtered_out";
    case ClipStatus::Annotated: return "annotated";
    case ClipStatus::DedupedOut: return "deduped_out";
    case ClipStatus::Sharded: return "sharded";
  }
  return "?";
}

ClipStatus parse_status(std::string_view s) {
  if (s == "split") return ClipStatus::Split;
  if (s == "filtered_out") return ClipStatus::FilteredOut;
  if (s == "annotated") return ClipStatus::Annotated;
  if (s == "deduped_out") return ClipStatus::DedupedOut;
  if (s == "sharded") return ClipStatus::Sharded;
  throw std::invalid_argument("unknown clip status '" + std::string(s) + "'");
}

bool is_terminal(ClipStatus s) {
  return s == ClipStatus::FilteredOut || s == ClipStatus::DedupedOut || s == ClipStatus::Sharded;
}

bool can_transition(ClipStatus from, ClipStatus to) {
  if (from == to) return true;
  switch (from) {
    case ClipStatus::Split: return to == ClipStatus::FilteredOut || to == ClipStatus::Annotated;
    case ClipStatus::Annotated: return to == ClipStatus::DedupedOut || to == ClipStatus::Sharded;
    default: return false;
  }
}

nlohmann::json ManifestEntry::to_json() const {
  nlohmann::json j;
  j["clip_id"] = clip_id;
  j["source_id"] = source_id;
  j["frame_range"] = {start_frame, end_frame};
  j["fps"] = {fps_num, fps_den};
  j["width"] = width;
  j["height"] = height;
  j["status"] = to_string(status);
  j["reason"] = reason;
  j["scores"] = scores;
  j["tags"] = tags;
  j["caption_refs"] = caption_refs;
  j["embedding_ref"] = embedding_ref;
  j["bucket"] = bucket;
  j["shard_ref"] = shard_ref;
  return j;
}

ManifestEntry ManifestEntry::from_json(const nlohmann::json& j) {
  try {
    ManifestEntry e;
    e.clip_id = j.at("clip_id").get<std::string>();
    e.source_id = j.at("source_id").get<std::string>();
    const auto& range = j.at("frame_range");
    if (!range.is_array() || range.size() != 2) throw std::invalid_argument("frame_range");
    e.start_frame = range[0].get<std::int64_t>();
    e.end_frame = range[1].get<std::int64_t>();
    const auto& fps = j.at("fps");
    if (!fps.is_array() || fps.size() != 2) throw std::invalid_argument("fps");
    e.fps_num = fps[0].get<int>();
    e.fps_den = fps[1].get<int>();
    e.width = j.at("width").get<int>();
    e.height = j.at("height").get<int>();
    e.status = parse_status(j.at("status").get<std::string>());
    e.reason = j.value("reason", "");
    if (j.contains("scores")) e.scores = j["scores"].get<std::map<std::string, double>>();
    if (j.contains("tags")) e.tags = j["tags"].get<std::set<std::string>>();
    if (j.contains("caption_refs")) e.caption_refs = j["caption_refs"].get<std::vector<std::string>>();
    e.embedding_ref = j.value("embedding_ref", "");
    e.bucket = j.value("bucket", "");
    e.shard_ref = j.value("shard_ref", "");
    if (e.clip_id.empty()) throw std::invalid_argument("empty clip_id");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("manifest entry: ") + ex.what());
  }
}

bool ManifestFilter::matches(const ManifestEntry& e) const {
  if (status && e.status != *status) return false;
  if (bucket && e.bucket != *bucket) return false;
  if (tag && !e.tags.contains(*tag)) return false;
  if (source_id && e.source_id != *source_id) return false;
  return true;
}

namespace {

struct Fold {
  std::map<std::string, ManifestEntry> latest;
  std::size_t corrupt = 0;
  std::vector<std::string> warnings;
};

Fold fold_file(const std::string& path) {
  Fold f;
  std::ifstream in(path);
  if (!in) return f;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto e = ManifestEntry::from_json(nlohmann::json::parse(line));
      const std::string id = e.clip_id;
      f.latest.insert_or_assign(id, std::move(e));
    } catch (const std::exception& ex) {
      ++f.corrupt;
      f.warnings.push_back(path + ":" + std::to_string(lineno) + ": skipped corrupt line: " +
                           ex.what());
    }
  }
  return f;
}

ScanResult collect(const std::map<std::string, ManifestEntry>& latest,
                   const ManifestFilter& filter) {
  ScanResult r;
  for (const auto& [_, e] : latest) {
    if (filter.matches(e)) r.entries.push_back(e);
  }
  return r;
}

}  // namespace

ScanResult scan_manifest(const std::string& path, const ManifestFilter& filter) {
  auto f = fold_file(path);
  auto r = collect(f.latest, filter);
  r.corrupt_lines = f.corrupt;
  r.warnings = std::move(f.warnings);
  return r;
}

ManifestStore::ManifestStore(std::string path) : path_(std::move(path)) {
  auto f = fold_file(path_);
  latest_ = std::move(f.latest);
  corrupt_ = f.corrupt;
}

void ManifestStore::append(const ManifestEntry& entry) {
  if ((entry.status == ClipStatus::FilteredOut || entry.status == ClipStatus::DedupedOut) &&
      entry.reason.empty()) {
    throw InvalidTransition("manifest: " + std::string(to_string(entry.status)) + " entry " +
                            entry.clip_id + " needs a reason");
  }
  std::lock_guard lock(mu_);
  if (const auto it = latest_.find(entry.clip_id); it != latest_.end()) {
    if (!can_transition(it->second.status, entry.status)) {
      throw InvalidTransition("manifest: " + entry.clip_id + " cannot move from " +
                              std::string(to_string(it->second.status)) + " to " +
                              std::string(to_string(entry.status)));
    }
  }
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot open manifest " + path_);
  out << entry.to_json().dump() << '\n';
  if (!out.flush()) throw std::runtime_error("manifest write failed: " + path_);
  latest_.insert_or_assign(entry.clip_id, entry);
}

ScanResult ManifestStore::scan(const ManifestFilter& filter) const {
  std::lock_guard lock(mu_);
  auto r = collect(latest_, filter);
  r.corrupt_lines = corrupt_;
  return r;
}

std::optional<ManifestEntry> ManifestStore::get(const std::string& clip_id) const {
  std::lock_guard lock(mu_);
  const auto it = latest_.find(clip_id);
  if (it == latest_.end()) return std::nullopt;
  return it->second;
}

std::size_t ManifestStore::size() const {
  std::lock_guard lock(mu_);
  return latest_.size();
}

}  // namespace curator::shard
