#include "curator/cli/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace curator::cli {

namespace fs = std::filesystem;
using nlohmann::json;

Profile parse_profile(const std::string& s) {
  if (s == "pretrain") return Profile::Pretrain;
  if (s == "finetune") return Profile::Finetune;
  throw ConfigError("profile must be pretrain or finetune, got '" + s + "'");
}

std::string_view to_string(Profile p) { return p == Profile::Pretrain ? "pretrain" : "finetune"; }

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

namespace {

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

const json& section(const json& doc, const char* name) {
  static const json empty = json::object();
  if (!doc.contains(name)) return empty;
  if (!doc[name].is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
  return doc[name];
}

void apply(Config& c, const json& doc) {
  const auto& paths = section(doc, "paths");
  read(paths, "input_dir", c.input_dir);
  read(paths, "manifest", c.manifest);
  read(paths, "work_dir", c.work_dir);
  read(paths, "shard_dir", c.shard_dir);

  const auto& sp = section(doc, "split");
  read(sp, "threshold", c.split.threshold);
  read(sp, "min_scene_len", c.split.min_scene_len);
  read(sp, "bins", c.split.bins);
  read(sp, "min_clip_seconds", c.split.min_clip_seconds);
  read(sp, "max_clip_seconds", c.split.max_clip_seconds);
  read(sp, "detector", c.split.detector);

  const auto& fl = section(doc, "filter");
  read(fl, "static_magnitude", c.filter.motion.static_magnitude);
  read(fl, "coherence_pan", c.filter.motion.coherence_pan);
  read(fl, "shaky_variance", c.filter.motion.shaky_variance);
  read(fl, "shaky_coherence", c.filter.motion.shaky_coherence);
  read(fl, "zoom_fraction", c.filter.motion.zoom_fraction);
  read(fl, "motion_pairs", c.filter.motion_pairs);
  read(fl, "quality_fraction", c.filter.quality_fraction);
  read(fl, "aesthetic_threshold", c.filter.aesthetic_threshold);
  read(fl, "text_mlp", c.filter.text_mlp);
  read(fl, "text_threshold", c.filter.text_threshold);
  read(fl, "type_mlp", c.filter.type_mlp);
  read(fl, "excluded_types", c.filter.excluded_types);
  read(fl, "resample", c.filter.resample);
  read(fl, "resample_seed", c.filter.resample_seed);

  const auto& an = section(doc, "annotate");
  read(an, "prompt", c.annotate.prompt);
  read(an, "max_inflight", c.annotate.max_inflight);
  read(an, "max_retries", c.annotate.max_retries);
  read(an, "backoff_ms", c.annotate.backoff_ms);

  const auto& dd = section(doc, "dedup");
  read(dd, "eps", c.dedup.eps);
  read(dd, "k", c.dedup.k);
  read(dd, "block", c.dedup.block);
  read(dd, "max_iters", c.dedup.max_iters);
  read(dd, "seed", c.dedup.seed);
  read(dd, "embedding_dim", c.dedup.embedding_dim);

  read(section(doc, "shard"), "max_bytes", c.shard.max_bytes);

  const auto& tc = section(doc, "transcoder");
  read(tc, "template", c.transcoder.command_template);
  read(tc, "max_parallel", c.transcoder.max_parallel);

  const auto& ep = section(doc, "endpoints");
  read(ep, "caption", c.endpoints.caption);
  read(ep, "embed", c.endpoints.embed);
  read(ep, "embed_text", c.endpoints.embed_text);
  read(ep, "quality", c.endpoints.quality);
  read(ep, "aesthetic", c.endpoints.aesthetic);
  read(ep, "boundary", c.endpoints.boundary);

  const auto& pl = section(doc, "pipeline");
  if (pl.contains("nodes")) {
    c.pipeline.nodes.clear();
    try {
      for (const auto& n : pl["nodes"]) {
        c.pipeline.nodes.push_back({n.at("node_id").get<std::string>(),
                                    orchestrator::ResourceVector::from_json(n.at("capacity"))});
      }
    } catch (const std::exception& e) {
      throw ConfigError(std::string("pipeline.nodes: ") + e.what());
    }
  }
  if (pl.contains("stages")) {
    if (!pl["stages"].is_object()) throw ConfigError("pipeline.stages must map stage names to overrides");
    c.pipeline.stage_overrides = pl["stages"];
  }
  read(pl, "seed", c.pipeline.seed);
}

const json& builtin_finetune() {
  static const json preset = {
      {"filter", {{"quality_fraction", 0.3}, {"aesthetic_threshold", 4.5}, {"static_magnitude", 0.5}}},
      {"dedup", {{"eps", 0.08}}},
  };
  return preset;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void resolve(std::string& p, const fs::path& base) {
  if (!p.empty() && fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
}

}  // namespace

void Config::validate() const {
  require(split.threshold > 0.0 && split.threshold <= 1.0, "split.threshold must be in (0, 1]");
  require(split.min_scene_len >= 1, "split.min_scene_len must be >= 1");
  require(split.bins >= 2 && split.bins <= 256, "split.bins must be in [2, 256]");
  require(split.min_clip_seconds > 0.0 && split.min_clip_seconds <= split.max_clip_seconds,
          "split clip lengths must satisfy 0 < min <= max");
  require(split.detector == "histogram" || split.detector == "neural",
          "split.detector must be histogram or neural");
  require(split.detector != "neural" || !endpoints.boundary.empty(),
          "split.detector neural needs endpoints.boundary");
  require(filter.motion.static_magnitude >= 0.0, "filter.static_magnitude must be >= 0");
  require(filter.motion.coherence_pan >= 0.0 && filter.motion.coherence_pan <= 1.0,
          "filter.coherence_pan must be in [0, 1]");
  require(filter.motion.shaky_variance >= 0.0, "filter.shaky_variance must be >= 0");
  require(filter.motion_pairs >= 1, "filter.motion_pairs must be >= 1");
  require(filter.quality_fraction >= 0.0 && filter.quality_fraction < 1.0,
          "filter.quality_fraction must be in [0, 1)");
  require(std::isfinite(filter.aesthetic_threshold), "filter.aesthetic_threshold must be finite");
  require(filter.text_threshold >= 0.0 && filter.text_threshold <= 1.0,
          "filter.text_threshold must be in [0, 1]");
  require(annotate.max_inflight >= 1, "annotate.max_inflight must be >= 1");
  require(annotate.max_retries >= 0 && annotate.backoff_ms >= 0, "annotate retry settings must be >= 0");
  require(dedup.eps >= 0.0 && dedup.eps < 1.0, "dedup.eps must be in [0, 1)");
  require(dedup.k >= 1, "dedup.k must be >= 1");
  require(dedup.block >= 1, "dedup.block must be >= 1");
  require(dedup.max_iters >= 1, "dedup.max_iters must be >= 1");
  require(dedup.embedding_dim >= 1, "dedup.embedding_dim must be >= 1");
  require(shard.max_bytes >= 4096, "shard.max_bytes must be >= 4096");
  require(transcoder.max_parallel >= 1, "transcoder.max_parallel must be >= 1");
  require(!pipeline.nodes.empty(), "pipeline.nodes must list at least one node");
}

json Config::to_json() const {
  json nodes = json::array();
  for (const auto& n : pipeline.nodes) nodes.push_back({{"node_id", n.node_id}, {"capacity", n.capacity.to_json()}});
  return {
      {"profile", to_string(profile)},
      {"paths", {{"input_dir", input_dir}, {"manifest", manifest}, {"work_dir", work_dir}, {"shard_dir", shard_dir}}},
      {"split",
       {{"threshold", split.threshold}, {"min_scene_len", split.min_scene_len}, {"bins", split.bins},
        {"min_clip_seconds", split.min_clip_seconds}, {"max_clip_seconds", split.max_clip_seconds},
        {"detector", split.detector}}},
      {"filter",
       {{"static_magnitude", filter.motion.static_magnitude}, {"coherence_pan", filter.motion.coherence_pan},
        {"shaky_variance", filter.motion.shaky_variance}, {"shaky_coherence", filter.motion.shaky_coherence},
        {"zoom_fraction", filter.motion.zoom_fraction}, {"motion_pairs", filter.motion_pairs},
        {"quality_fraction", filter.quality_fraction}, {"aesthetic_threshold", filter.aesthetic_threshold},
        {"text_mlp", filter.text_mlp}, {"text_threshold", filter.text_threshold}, {"type_mlp", filter.type_mlp},
        {"excluded_types", filter.excluded_types}, {"resample", filter.resample},
        {"resample_seed", filter.resample_seed}}},
      {"annotate",
       {{"prompt", annotate.prompt}, {"max_inflight", annotate.max_inflight},
        {"max_retries", annotate.max_retries}, {"backoff_ms", annotate.backoff_ms}}},
      {"dedup",
       {{"eps", dedup.eps}, {"k", dedup.k}, {"block", dedup.block}, {"max_iters", dedup.max_iters},
        {"seed", dedup.seed}, {"embedding_dim", dedup.embedding_dim}}},
      {"shard", {{"max_bytes", shard.max_bytes}}},
      {"transcoder", {{"template", transcoder.command_template}, {"max_parallel", transcoder.max_parallel}}},
      {"endpoints",
       {{"caption", endpoints.caption}, {"embed", endpoints.embed}, {"embed_text", endpoints.embed_text},
        {"quality", endpoints.quality}, {"aesthetic", endpoints.aesthetic}, {"boundary", endpoints.boundary}}},
      {"pipeline", {{"nodes", nodes}, {"stages", pipeline.stage_overrides}, {"seed", pipeline.seed}}},
  };
}

Config config_from_json(const json& doc, Profile profile, const EnvLookup& env) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  Config base;
  base.pipeline.nodes = {{"node-0", {{"cpu", 8}, {"decode", 2}, {"accel", 2}, {"net", 4}}}};
  apply(base, doc);

  Config c = base;
  c.profile = profile;
  if (profile == Profile::Finetune) {
    const json& overlay = doc.contains("profiles") && doc["profiles"].contains("finetune")
                              ? doc["profiles"]["finetune"]
                              : builtin_finetune();
    apply(c, overlay);
    const auto& b = base.filter;
    const auto& f = c.filter;
    require(f.quality_fraction >= b.quality_fraction, "finetune profile loosens filter.quality_fraction");
    require(f.aesthetic_threshold >= b.aesthetic_threshold, "finetune profile loosens filter.aesthetic_threshold");
    require(f.motion.static_magnitude >= b.motion.static_magnitude, "finetune profile loosens filter.static_magnitude");
    require(f.text_threshold <= b.text_threshold, "finetune profile loosens filter.text_threshold");
    require(c.dedup.eps >= base.dedup.eps, "finetune profile loosens dedup.eps");
    require(c.split.min_clip_seconds >= base.split.min_clip_seconds, "finetune profile loosens split.min_clip_seconds");
  }

  const std::pair<const char*, std::string*> env_map[] = {
      {"CURATOR_CAPTION_ENDPOINT", &c.endpoints.caption},
      {"CURATOR_EMBED_ENDPOINT", &c.endpoints.embed},
      {"CURATOR_QUALITY_ENDPOINT", &c.endpoints.quality},
      {"CURATOR_AESTHETIC_ENDPOINT", &c.endpoints.aesthetic},
  };
  for (const auto& [name, field] : env_map) {
    if (auto v = env(name)) *field = *v;
  }
  c.validate();
  return c;
}

Config load_config(const std::optional<std::string>& path, Profile profile, const EnvLookup& env) {
  if (!path) return config_from_json(json::object(), profile, env);
  std::ifstream in(*path);
  if (!in) throw ConfigError("cannot open config file " + *path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + *path + " is not valid JSON: " + e.what());
  }
  Config c = config_from_json(doc, profile, env);
  // Relative paths in a config file are relative to the file.
  const fs::path base = fs::absolute(*path).parent_path();
  for (std::string* p : {&c.input_dir, &c.manifest, &c.work_dir, &c.shard_dir, &c.filter.text_mlp, &c.filter.type_mlp}) {
    resolve(*p, base);
  }
  return c;
}

}  // namespace curator::cli
