#include "stage_ops.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "curator/dedup/kmeans.hpp"
#include "curator/dedup/search_index.hpp"
#include "curator/filters/motion.hpp"
#include "curator/frame_io/color.hpp"
#include "curator/frame_io/sampling.hpp"
#include "curator/shard/bucket.hpp"
#include "curator/splitter/clip_rules.hpp"

namespace curator::cli::detail {

namespace fs = std::filesystem;
using shard::ManifestEntry;

std::string source_path(const Config& config, const std::string& source_id) {
  return (fs::path(config.input_dir) / (source_id + ".y4m")).string();
}

std::vector<std::string> list_sources(const Config& config) {
  std::error_code ec;
  if (!fs::is_directory(config.input_dir, ec)) {
    throw ConfigError("input directory " + config.input_dir + " does not exist");
  }
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(config.input_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".y4m") out.push_back(e.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<std::string> split_sources(const shard::ScanResult& scan) {
  std::set<std::string> out;
  for (const auto& e : scan.entries) out.insert(e.source_id);
  return out;
}

std::vector<ManifestEntry> split_source(const Config& config, const Services& services,
                                        const std::string& source_id) {
  const std::string path = source_path(config, source_id);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  frame_io::Y4mReader reader(in);
  const auto header = reader.header();

  std::vector<std::int64_t> cuts;
  std::int64_t frames = 0;
  if (config.split.detector == "neural") {
    std::vector<frame_io::RgbImage> all;
    for (const auto& f : reader) all.push_back(frame_io::to_rgb(f, header));
    frames = static_cast<std::int64_t>(all.size());
    for (const auto& b : splitter::detect_shots_neural(all, *services.boundary)) cuts.push_back(b.frame_index);
  } else {
    splitter::HistogramShotDetector detector({config.split.threshold, config.split.min_scene_len, config.split.bins});
    for (const auto& f : reader) {
      if (auto b = detector.feed(frame_io::to_rgb(f, header))) cuts.push_back(b->frame_index);
      ++frames;
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](auto c) { return c <= 0 || c >= frames; }), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<ManifestEntry> out;
  if (frames == 0) return out;
  const splitter::ClipRules rules{config.split.min_clip_seconds, config.split.max_clip_seconds};
  for (const auto& c : splitter::apply_clip_rules(cuts, frames, header.fps_num, header.fps_den, source_id, rules)) {
    ManifestEntry e;
    e.clip_id = clip_id_for(source_id, c.start_frame, c.end_frame);
    e.source_id = source_id;
    e.start_frame = c.start_frame;
    e.end_frame = c.end_frame;
    e.fps_num = header.fps_num;
    e.fps_den = header.fps_den;
    e.width = header.width;
    e.height = header.height;
    e.status = shard::ClipStatus::Split;
    out.push_back(std::move(e));
  }
  return out;
}

frame_io::Video load_clip(const Config& config, const ManifestEntry& entry) {
  return frame_io::read_y4m_range(source_path(config, entry.source_id), entry.start_frame, entry.end_frame);
}

std::vector<frame_io::RgbImage> sample_rgb(const frame_io::Video& clip, std::int64_t count) {
  std::vector<frame_io::RgbImage> out;
  if (clip.frames.empty()) return out;
  for (auto i : frame_io::sample_uniform_frames(static_cast<std::int64_t>(clip.frames.size()), count)) {
    out.push_back(frame_io::to_rgb(clip.frames[static_cast<std::size_t>(i)], clip.header));
  }
  return out;
}

filters::FilterVerdict motion_verdict(const Config& config, const ManifestEntry& entry,
                                      const frame_io::Video& clip) {
  const auto n = static_cast<std::int64_t>(clip.frames.size());
  if (n < 2) {
    filters::FilterVerdict v;
    v.clip_id = entry.clip_id;
    v.reject(filters::RejectReason::Static);
    return v;
  }
  std::vector<filters::FlowField> fields;
  for (auto i : frame_io::sample_uniform_frames(n - 1, config.filter.motion_pairs)) {
    fields.push_back(filters::estimate_flow_block(clip.frames[static_cast<std::size_t>(i)],
                                                  clip.frames[static_cast<std::size_t>(i) + 1], clip.header));
  }
  const auto stats = filters::motion_stats(fields);
  auto v = filters::classify_motion(stats, config.filter.motion, entry.clip_id);
  v.scores["motion_magnitude"] = stats.mean_magnitude;
  v.scores["motion_coherence"] = stats.angular_coherence;
  return v;
}

Classifiers Classifiers::load(const Config& config) {
  Classifiers c;
  if (!config.filter.text_mlp.empty()) {
    c.text = filters::MlpWeights::load(config.filter.text_mlp);
    if (c.text->output_dim() != 1) throw ConfigError("text overlay classifier must have one output");
  }
  if (!config.filter.type_mlp.empty()) {
    c.type = filters::MlpWeights::load(config.filter.type_mlp);
    if (c.type->labels.size() != static_cast<std::size_t>(c.type->output_dim())) {
      throw ConfigError("video type classifier needs one label per output");
    }
  }
  for (const auto* m : {&c.text, &c.type}) {
    if (*m && (*m)->input_dim() != config.dedup.embedding_dim) {
      throw ConfigError("classifier input width does not match dedup.embedding_dim");
    }
  }
  return c;
}

void classify_embedding(const Config& config, const Classifiers& classifiers, std::span<const float> embedding,
                        filters::FilterVerdict& verdict) {
  if (classifiers.text) {
    const double p = filters::mlp_infer(embedding, *classifiers.text).front();
    verdict.scores["text_overlay"] = p;
    if (verdict.pass && p > config.filter.text_threshold) verdict.reject(filters::RejectReason::TextOverlay);
  }
  if (classifiers.type) {
    const auto probs = filters::mlp_infer(embedding, *classifiers.type);
    const auto best = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    const auto& label = classifiers.type->labels[best];
    verdict.scores["type_confidence"] = probs[best];
    verdict.tags.insert("type:" + label);
    const auto& ex = config.filter.excluded_types;
    if (verdict.pass && std::find(ex.begin(), ex.end(), label) != ex.end()) {
      verdict.reject(filters::RejectReason::ExcludedType);
    }
  }
}

ClipFeatures score_and_embed(const Config& config, const Services& services, const ManifestEntry& entry,
                             const frame_io::Video& clip) {
  const auto frames = sample_rgb(clip, 8);
  ClipFeatures f;
  f.quality = services.quality->score(entry.clip_id, frames);
  f.aesthetic = services.aesthetic->score(entry.clip_id, frames);
  f.embedding = services.embedder->embed(entry.clip_id, frames);
  if (static_cast<int>(f.embedding.size()) != config.dedup.embedding_dim) {
    throw ServiceError(ServiceError::Kind::Malformed,
                       "embedding for " + entry.clip_id + " has " + std::to_string(f.embedding.size()) +
                           " dims, expected " + std::to_string(config.dedup.embedding_dim));
  }
  if (!dedup::normalize(f.embedding)) {
    throw ServiceError(ServiceError::Kind::Malformed, "zero embedding for " + entry.clip_id);
  }
  return f;
}

EmbeddingStore::EmbeddingStore(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    try {
      const auto j = nlohmann::json::parse(line);
      vectors_[j.at("clip_id").get<std::string>()] = j.at("vector").get<std::vector<float>>();
    } catch (const nlohmann::json::exception&) {
      // A torn last line from an interrupted run; the clip gets re-embedded.
    }
  }
}

void EmbeddingStore::put(const std::string& clip_id, const std::vector<float>& vector) {
  std::lock_guard lock(mu_);
  fs::create_directories(fs::path(path_).parent_path());
  std::ofstream out(path_, std::ios::app);
  out << nlohmann::json{{"clip_id", clip_id}, {"vector", vector}}.dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("cannot append to " + path_);
  vectors_[clip_id] = vector;
}

std::optional<std::vector<float>> EmbeddingStore::get(const std::string& clip_id) const {
  std::lock_guard lock(mu_);
  const auto it = vectors_.find(clip_id);
  if (it == vectors_.end()) return std::nullopt;
  return it->second;
}

std::string EmbeddingStore::ref(const std::string& clip_id) const {
  return fs::path(path_).filename().string() + "#" + clip_id;
}

std::size_t EmbeddingStore::size() const {
  std::lock_guard lock(mu_);
  return vectors_.size();
}

std::vector<std::string> CaptionStore::put(const std::vector<annotate::Caption>& captions) {
  std::lock_guard lock(mu_);
  fs::create_directories(fs::path(path_).parent_path());
  std::ofstream out(path_, std::ios::app);
  std::vector<std::string> refs;
  const std::string file = fs::path(path_).filename().string();
  for (const auto& c : captions) {
    out << nlohmann::json{{"clip_id", c.clip_id},
                          {"window_index", c.window_index},
                          {"text", c.text},
                          {"char_count", c.char_count},
                          {"word_count", c.word_count}}
               .dump()
        << '\n';
    refs.push_back(file + "#" + c.clip_id + ":" + std::to_string(c.window_index));
  }
  out.flush();
  if (!out) throw std::runtime_error("cannot append to " + path_);
  return refs;
}

std::vector<annotate::CaptionRequest> caption_requests(const Config& config, const ManifestEntry& entry) {
  const std::string prompt =
      config.annotate.prompt.empty() ? std::string(annotate::kDefaultPrompt) : config.annotate.prompt;
  std::vector<annotate::CaptionRequest> out;
  const auto windows = annotate::window_clip(entry.end_frame - entry.start_frame);
  for (std::size_t w = 0; w < windows.size(); ++w) {
    out.push_back(annotate::build_caption_request(entry.clip_id, windows[w], static_cast<int>(w), prompt,
                                                  source_path(config, entry.source_id)));
  }
  return out;
}

annotate::RetryPolicy retry_policy(const Config& config) {
  annotate::RetryPolicy p;
  p.max_retries = config.annotate.max_retries;
  p.base_backoff = std::chrono::milliseconds(config.annotate.backoff_ms);
  return p;
}

annotate::FrameProvider frame_provider(const Config& config, std::map<std::string, ManifestEntry> entries) {
  return [&config, entries = std::move(entries)](const annotate::CaptionRequest& r) {
    std::vector<frame_io::RgbImage> out;
    const auto it = entries.find(r.clip_id);
    if (it == entries.end() || r.frame_indices.empty()) return out;
    const auto& e = it->second;
    const auto lo = *std::min_element(r.frame_indices.begin(), r.frame_indices.end());
    const auto hi = *std::max_element(r.frame_indices.begin(), r.frame_indices.end());
    const auto video = frame_io::read_y4m_range(source_path(config, e.source_id), e.start_frame + lo,
                                                e.start_frame + hi + 1);
    for (auto i : r.frame_indices) out.push_back(frame_io::to_rgb(video.frames[static_cast<std::size_t>(i - lo)], video.header));
    return out;
  };
}

DedupOutcome run_dedup(const Config& config, const std::vector<ManifestEntry>& entries, const EmbeddingStore& store) {
  DedupOutcome out;
  if (entries.empty()) return out;
  std::vector<dedup::Embedding> points;
  std::vector<dedup::DedupRecord> records;
  for (const auto& e : entries) {
    auto v = store.get(e.clip_id);
    if (!v) throw dedup::MissingEmbedding("no embedding for " + e.clip_id);
    points.push_back({e.clip_id, *v, true});
    records.push_back({e.clip_id, std::move(*v), e.width, e.height});
  }
  const int k = std::min<int>(config.dedup.k, static_cast<int>(points.size()));
  const auto model = dedup::kmeans_fit(points, k, config.dedup.max_iters, config.dedup.seed);
  const auto result = dedup::dedup(records, model, config.dedup.eps, config.dedup.block);
  out.kept = result.kept;
  out.groups = result.groups.size();
  for (const auto& g : result.groups) {
    for (const auto& m : g.members) {
      if (m != g.representative) out.removed[m] = g.representative;
    }
  }
  return out;
}

std::size_t rebuild_search_index(const Config& config, const shard::ScanResult& scan, const EmbeddingStore& store) {
  std::vector<dedup::Embedding> points;
  for (const auto& e : scan.entries) {
    const bool searchable = e.status == shard::ClipStatus::Sharded ||
                            (e.status == shard::ClipStatus::Annotated && e.tags.count(kKeptTag));
    if (!searchable) continue;
    if (auto v = store.get(e.clip_id)) points.push_back({e.clip_id, std::move(*v), true});
  }
  if (points.empty()) return 0;
  const int k = std::min<int>(config.dedup.k, static_cast<int>(points.size()));
  const auto model = dedup::kmeans_fit(points, k, config.dedup.max_iters, config.dedup.seed);
  fs::create_directories(config.work_dir);
  dedup::SearchIndex(points, model).save((fs::path(config.work_dir) / kSearchIndexFile).string());
  return points.size();
}

std::optional<std::string> ClipPayloadSource::fetch(const ManifestEntry& entry) {
  try {
    const auto clip = load_clip(config_, entry);
    if (clip.frames.empty()) return std::nullopt;
    auto header = clip.header;
    header.frame_count = static_cast<std::int64_t>(clip.frames.size());
    return frame_io::write_y4m(header, clip.frames);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<ManifestEntry> shard_entries(const Config& config, std::vector<ManifestEntry> entries,
                                         std::vector<std::string>& warnings) {
  if (entries.empty()) return entries;
  for (auto& e : entries) e.bucket = shard::assign_bucket(e.width, e.height, e.duration_seconds()).name();

  // Each invocation writes a new batch directory so earlier shards stay put.
  fs::create_directories(config.shard_dir);
  int batch = 0;
  std::string batch_name;
  do {
    char name[32];
    std::snprintf(name, sizeof name, "batch-%04d", batch++);
    batch_name = name;
  } while (fs::exists(fs::path(config.shard_dir) / batch_name));
  const auto out_dir = fs::path(config.shard_dir) / batch_name;

  ClipPayloadSource source(config);
  const auto written = shard::write_shards(entries, source, config.shard.max_bytes, out_dir.string());
  warnings.insert(warnings.end(), written.warnings.begin(), written.warnings.end());
  std::map<std::string, std::string> refs;
  for (const auto& s : written.shards) {
    for (const auto& m : s.members) {
      refs[m.clip_id] = (fs::path(batch_name) / s.path).string() + "#" + std::to_string(m.offset);
    }
  }
  for (auto& e : entries) {
    e.status = shard::ClipStatus::Sharded;
    e.shard_ref = refs.at(e.clip_id);
  }
  return entries;
}

nlohmann::json status_counts(const shard::ScanResult& scan) {
  nlohmann::json j = nlohmann::json::object();
  for (auto s : {shard::ClipStatus::Split, shard::ClipStatus::FilteredOut, shard::ClipStatus::Annotated,
                 shard::ClipStatus::DedupedOut, shard::ClipStatus::Sharded}) {
    j[std::string(shard::to_string(s))] = 0;
  }
  for (const auto& e : scan.entries) j[std::string(shard::to_string(e.status))] = j[std::string(shard::to_string(e.status))].get<int>() + 1;
  return j;
}

}  // namespace curator::cli::detail
