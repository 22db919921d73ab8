#include "curator/cli/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "curator/dedup/search_index.hpp"
#include "curator/filters/quality.hpp"
#include "curator/frame_io/transcode.hpp"
#include "curator/filters/resample.hpp"
#include "curator/orchestrator/scheduler.hpp"
#include "curator/orchestrator/simulator.hpp"
#include "curator/splitter/eval.hpp"
#include "stage_ops.hpp"

namespace curator::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using shard::ClipStatus;
using shard::ManifestEntry;

std::string clip_id_for(const std::string& source_id, std::int64_t start, std::int64_t end) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "_%06lld_%06lld", static_cast<long long>(start), static_cast<long long>(end));
  return source_id + buf;
}

Services Services::from_config(const Config& config) {
  Services s;
  if (config.endpoints.quality.empty()) {
    s.quality = std::make_shared<filters::StubScorer>(0.0, 1.0, 0x51);
  } else {
    s.quality = std::make_shared<filters::HttpScorer>(HttpEndpoint::parse(config.endpoints.quality));
  }
  if (config.endpoints.aesthetic.empty()) {
    s.aesthetic = std::make_shared<filters::StubScorer>(3.0, 10.0, 0xAE);
  } else {
    s.aesthetic = std::make_shared<filters::HttpScorer>(HttpEndpoint::parse(config.endpoints.aesthetic));
  }
  if (config.endpoints.embed.empty()) {
    s.embedder = std::make_shared<dedup::StubEmbedder>(config.dedup.embedding_dim, config.dedup.seed);
  } else {
    std::optional<HttpEndpoint> text;
    if (!config.endpoints.embed_text.empty()) text = HttpEndpoint::parse(config.endpoints.embed_text);
    s.embedder = std::make_shared<dedup::HttpEmbedder>(HttpEndpoint::parse(config.endpoints.embed), text);
  }
  if (config.endpoints.caption.empty()) {
    s.captioner = std::make_shared<annotate::StubCaptioner>();
  } else {
    // Frames are attached per request by the annotate command.
    s.captioner = nullptr;
  }
  if (!config.endpoints.boundary.empty()) {
    s.boundary = std::make_shared<splitter::HttpBoundaryDetector>(HttpEndpoint::parse(config.endpoints.boundary));
  }
  return s;
}

void CommandIo::emit(const json& report) const {
  if (report_path) {
    const auto parent = fs::path(*report_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream f(*report_path);
    f << report.dump(2) << '\n';
    if (!f) err << "cannot write report to " << *report_path << '\n';
  } else {
    out << report.dump(2) << '\n';
  }
}

namespace {

shard::ScanResult scan_with_warnings(shard::ManifestStore& store, const CommandIo& io) {
  auto scan = store.scan();
  for (const auto& w : scan.warnings) io.err << "warning: " << w << '\n';
  return scan;
}

std::shared_ptr<annotate::CaptionClient> caption_client(const Config& config, const Services& services,
                                                        const std::vector<ManifestEntry>& entries) {
  if (services.captioner) return services.captioner;
  std::map<std::string, ManifestEntry> by_id;
  for (const auto& e : entries) by_id[e.clip_id] = e;
  return std::make_shared<annotate::HttpCaptioner>(HttpEndpoint::parse(config.endpoints.caption),
                                                   detail::frame_provider(config, std::move(by_id)));
}

json failure(const std::string& clip, const std::string& message) {
  return {{"clip_id", clip}, {"error", message}};
}

}  // namespace

int cmd_split(const Config& config, const Services& services, const CommandIo& io) {
  shard::ManifestStore store(config.manifest);
  const auto scan = scan_with_warnings(store, io);
  const auto done = detail::split_sources(scan);
  json report{{"command", "split"}, {"sources", 0}, {"skipped_sources", 0}, {"new_clips", 0}};
  json failures = json::array();
  for (const auto& source : detail::list_sources(config)) {
    if (done.count(source)) {
      report["skipped_sources"] = report["skipped_sources"].get<int>() + 1;
      continue;
    }
    report["sources"] = report["sources"].get<int>() + 1;
    try {
      for (const auto& e : detail::split_source(config, services, source)) {
        store.append(e);
        report["new_clips"] = report["new_clips"].get<int>() + 1;
      }
    } catch (const std::exception& e) {
      failures.push_back({{"source_id", source}, {"error", e.what()}});
    }
  }
  report["failures"] = failures;
  io.emit(report);
  return failures.empty() ? kExitOk : kExitPartial;
}

int cmd_filter(const Config& config, const Services& services, const CommandIo& io) {
  shard::ManifestStore store(config.manifest);
  const auto scan = scan_with_warnings(store, io);
  const auto classifiers = detail::Classifiers::load(config);
  detail::EmbeddingStore embeddings((fs::path(config.work_dir) / detail::kEmbeddingsFile).string());

  struct Candidate {
    ManifestEntry entry;
    filters::FilterVerdict verdict;
    detail::ClipFeatures features;
  };
  std::vector<Candidate> candidates;
  json failures = json::array();
  std::map<std::string, int> reasons;
  auto reject = [&](ManifestEntry e, const filters::FilterVerdict& v) {
    e.status = ClipStatus::FilteredOut;
    e.reason = std::string(filters::to_string(v.reason));
    for (const auto& [k, s] : v.scores) e.scores[k] = s;
    e.tags.insert(v.tags.begin(), v.tags.end());
    store.append(e);
    ++reasons[e.reason];
  };

  std::size_t eligible = 0;
  for (const auto& entry : scan.entries) {
    if (entry.status != ClipStatus::Split || entry.tags.count(detail::kPassedTag)) continue;
    ++eligible;
    try {
      const auto clip = detail::load_clip(config, entry);
      auto verdict = detail::motion_verdict(config, entry, clip);
      if (!verdict.pass) {
        reject(entry, verdict);
        continue;
      }
      auto features = detail::score_and_embed(config, services, entry, clip);
      embeddings.put(entry.clip_id, features.embedding);
      verdict.scores["quality"] = features.quality;
      verdict.scores["aesthetic"] = features.aesthetic;
      candidates.push_back({entry, std::move(verdict), std::move(features)});
    } catch (const std::exception& e) {
      failures.push_back(failure(entry.clip_id, e.what()));
    }
  }

  // Corpus-level quality cut over every clip that survived the motion filter.
  std::vector<filters::ScoredClip> scored;
  for (const auto& c : candidates) scored.push_back({c.entry.clip_id, c.features.quality});
  const auto cut = filters::percentile_cut(scored, config.filter.quality_fraction);
  const std::set<std::string> low_quality(cut.removed.begin(), cut.removed.end());
  for (auto& c : candidates) {
    auto& v = c.verdict;
    if (low_quality.count(c.entry.clip_id)) v.reject(filters::RejectReason::LowQuality);
    if (v.pass && !filters::aesthetic_gate(c.features.aesthetic, config.filter.aesthetic_threshold)) {
      v.reject(filters::RejectReason::LowAesthetic);
    }
    detail::classify_embedding(config, classifiers, c.features.embedding, v);
  }

  if (config.filter.resample) {
    std::map<std::string, std::int64_t> counts;
    std::int64_t typed = 0;
    for (const auto& c : candidates) {
      if (!c.verdict.pass) continue;
      for (const auto& t : c.verdict.tags) {
        if (t.rfind("type:", 0) == 0) {
          ++counts[t.substr(5)];
          ++typed;
        }
      }
    }
    filters::CategoryDistribution target;
    for (const auto& [name, share] : filters::default_category_targets()) target[name] = share;
    filters::CategoryDistribution observed;
    bool complete = typed > 0;
    for (const auto& [name, _] : target) {
      const auto it = counts.find(name);
      if (it == counts.end()) {
        complete = false;
        break;
      }
      observed[name] = static_cast<double>(it->second) / typed;
    }
    if (!complete) {
      io.err << "warning: resampling skipped, not every category is represented among passing clips\n";
    } else {
      const auto acceptance = filters::resample_weights(observed, target);
      for (auto& c : candidates) {
        if (!c.verdict.pass) continue;
        for (const auto& t : c.verdict.tags) {
          if (t.rfind("type:", 0) != 0) continue;
          const auto it = acceptance.find(t.substr(5));
          if (it != acceptance.end() && !filters::accept_sample(it->second, c.entry.clip_id, config.filter.resample_seed)) {
            c.verdict.reject(filters::RejectReason::Resampled);
          }
        }
      }
    }
  }

  std::size_t passed = 0;
  for (auto& c : candidates) {
    c.entry.embedding_ref = embeddings.ref(c.entry.clip_id);
    if (!c.verdict.pass) {
      reject(c.entry, c.verdict);
      continue;
    }
    auto e = c.entry;
    for (const auto& [k, s] : c.verdict.scores) e.scores[k] = s;
    e.tags.insert(c.verdict.tags.begin(), c.verdict.tags.end());
    e.tags.insert(detail::kPassedTag);
    store.append(e);
    ++passed;
  }

  json report{{"command", "filter"},
              {"eligible", eligible},
              {"passed", passed},
              {"filtered_out", reasons},
              {"quality_threshold", cut.removed.empty() ? json(nullptr) : json(cut.threshold)},
              {"failures", failures}};
  io.emit(report);
  return failures.empty() ? kExitOk : kExitPartial;
}

int cmd_annotate(const Config& config, const Services& services, const CommandIo& io) {
  shard::ManifestStore store(config.manifest);
  const auto scan = scan_with_warnings(store, io);
  std::vector<ManifestEntry> eligible;
  for (const auto& e : scan.entries) {
    if (e.status == ClipStatus::Split && e.tags.count(detail::kPassedTag)) eligible.push_back(e);
  }
  std::vector<annotate::CaptionRequest> requests;
  for (const auto& e : eligible) {
    auto r = detail::caption_requests(config, e);
    requests.insert(requests.end(), r.begin(), r.end());
  }
  auto client = caption_client(config, services, eligible);
  const auto batch = annotate::caption_corpus(requests, *client, detail::retry_policy(config), config.annotate.max_inflight);

  std::map<std::string, std::vector<annotate::Caption>> by_clip;
  for (const auto& c : batch.captions) by_clip[c.clip_id].push_back(c);
  std::set<std::string> failed_clips;
  json failures = json::array();
  for (const auto& f : batch.failures) {
    failed_clips.insert(f.clip_id);
    failures.push_back({{"clip_id", f.clip_id}, {"window_index", f.window_index}, {"error", f.message}});
  }
  detail::CaptionStore captions((fs::path(config.work_dir) / detail::kCaptionsFile).string());
  std::size_t annotated = 0;
  std::vector<annotate::Caption> all;
  for (auto e : eligible) {
    if (failed_clips.count(e.clip_id)) continue;
    auto& caps = by_clip[e.clip_id];
    e.caption_refs = captions.put(caps);
    e.status = ClipStatus::Annotated;
    store.append(e);
    all.insert(all.end(), caps.begin(), caps.end());
    ++annotated;
  }
  json report{{"command", "annotate"},
              {"eligible", eligible.size()},
              {"annotated", annotated},
              {"requests", requests.size()},
              {"retries", batch.retries},
              {"failures", failures}};
  if (!all.empty()) {
    const auto stats = annotate::caption_stats(all);
    report["mean_chars"] = stats.mean_chars;
    report["mean_words"] = stats.mean_words;
  }
  io.emit(report);
  return failures.empty() ? kExitOk : kExitPartial;
}

int cmd_dedup(const Config& config, const Services&, const CommandIo& io) {
  shard::ManifestStore store(config.manifest);
  const auto scan = scan_with_warnings(store, io);
  detail::EmbeddingStore embeddings((fs::path(config.work_dir) / detail::kEmbeddingsFile).string());

  std::vector<ManifestEntry> eligible;
  std::size_t unfiltered = 0, unannotated = 0;
  for (const auto& e : scan.entries) {
    if (e.status == ClipStatus::Annotated && !e.tags.count(detail::kKeptTag)) eligible.push_back(e);
    if (e.status == ClipStatus::Split && !e.tags.count(detail::kPassedTag)) ++unfiltered;
    if (e.status == ClipStatus::Split && e.tags.count(detail::kPassedTag)) ++unannotated;
  }
  for (const auto& e : eligible) {
    if (e.embedding_ref.empty() || !embeddings.get(e.clip_id)) {
      io.err << "error: dedup needs embeddings from the filter stage; " << e.clip_id << " has none\n";
      return kExitUsage;
    }
  }
  if (eligible.empty() && (unfiltered > 0 || unannotated > 0)) {
    io.err << "error: dedup needs embeddings from the filter stage and captions from the annotate stage; "
           << unfiltered << " clips await filter, " << unannotated << " await annotate\n";
    return kExitUsage;
  }

  const auto outcome = detail::run_dedup(config, eligible, embeddings);
  for (auto e : eligible) {
    const auto it = outcome.removed.find(e.clip_id);
    if (it != outcome.removed.end()) {
      e.status = ClipStatus::DedupedOut;
      e.reason = "duplicate_of:" + it->second;
    } else {
      e.tags.insert(detail::kKeptTag);
    }
    store.append(e);
  }
  const auto indexed = detail::rebuild_search_index(config, store.scan(), embeddings);
  json report{{"command", "dedup"},
              {"eligible", eligible.size()},
              {"kept", outcome.kept.size()},
              {"removed", outcome.removed.size()},
              {"groups", outcome.groups},
              {"removal_fraction", eligible.empty() ? 0.0 : static_cast<double>(outcome.removed.size()) / eligible.size()},
              {"indexed", indexed}};
  io.emit(report);
  return kExitOk;
}

int cmd_shard(const Config& config, const Services&, const CommandIo& io) {
  shard::ManifestStore store(config.manifest);
  const auto scan = scan_with_warnings(store, io);
  std::vector<ManifestEntry> eligible;
  std::size_t undeduped = 0;
  for (const auto& e : scan.entries) {
    if (e.status != ClipStatus::Annotated) continue;
    if (e.tags.count(detail::kKeptTag)) {
      eligible.push_back(e);
    } else {
      ++undeduped;
    }
  }
  if (eligible.empty() && undeduped > 0) {
    io.err << "error: shard needs the dedup stage first; " << undeduped << " annotated clips are not deduplicated\n";
    return kExitUsage;
  }
  std::vector<std::string> warnings;
  json failures = json::array();
  std::vector<ManifestEntry> sharded;
  try {
    sharded = detail::shard_entries(config, eligible, warnings);
  } catch (const shard::PayloadMissing& e) {
    failures.push_back(failure("", e.what()));
  }
  std::map<std::string, int> buckets;
  for (const auto& e : sharded) {
    store.append(e);
    ++buckets[e.bucket];
  }
  json report{{"command", "shard"},
              {"eligible", eligible.size()},
              {"sharded", sharded.size()},
              {"buckets", buckets},
              {"warnings", warnings},
              {"failures", failures}};
  io.emit(report);
  return failures.empty() ? kExitOk : kExitPartial;
}

int cmd_eval_split(const std::string& pred_path, const std::string& gt_path, std::int64_t tolerance,
                   const CommandIo& io) {
  for (const auto& p : {pred_path, gt_path}) {
    if (!fs::is_regular_file(p)) {
      io.err << "error: boundary file not found: " << p << '\n';
      return kExitUsage;
    }
  }
  if (tolerance < 0) {
    io.err << "error: tolerance must be >= 0\n";
    return kExitUsage;
  }
  std::vector<std::int64_t> pred, gt;
  try {
    pred = splitter::load_boundary_file(pred_path);
    gt = splitter::load_boundary_file(gt_path);
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  const auto r = splitter::eval_split(pred, gt, tolerance);
  io.emit({{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
           {"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}, {"tolerance", tolerance}});
  return kExitOk;
}

int cmd_search(const Config& config, const Services& services, const SearchArgs& args, const CommandIo& io) {
  const int sources = args.query_clip.has_value() + args.vector_file.has_value() + args.text.has_value();
  if (sources != 1) {
    io.err << "error: give exactly one of --query-clip, --vector-file, --text\n";
    return kExitUsage;
  }
  const auto index_path = fs::path(config.work_dir) / detail::kSearchIndexFile;
  if (!fs::is_regular_file(index_path)) {
    io.err << "error: search index " << index_path.string() << " not found; run the dedup stage first\n";
    return kExitUsage;
  }
  const auto index = dedup::SearchIndex::load(index_path.string());
  std::vector<float> query;
  if (args.query_clip) {
    detail::EmbeddingStore store((fs::path(config.work_dir) / detail::kEmbeddingsFile).string());
    auto v = store.get(*args.query_clip);
    if (!v) {
      io.err << "error: no embedding for clip " << *args.query_clip << '\n';
      return kExitUsage;
    }
    query = std::move(*v);
  } else if (args.vector_file) {
    std::ifstream in(*args.vector_file);
    if (!in) {
      io.err << "error: vector file not found: " << *args.vector_file << '\n';
      return kExitUsage;
    }
    try {
      const auto j = json::parse(in);
      query = (j.is_object() ? j.at("vector") : j).get<std::vector<float>>();
    } catch (const json::exception& e) {
      io.err << "error: vector file must hold a JSON array of numbers: " << e.what() << '\n';
      return kExitUsage;
    }
  } else {
    query = services.embedder->embed_text(*args.text);
  }
  if (static_cast<int>(query.size()) != index.dim()) {
    io.err << "error: query has " << query.size() << " dims, index has " << index.dim() << '\n';
    return kExitUsage;
  }
  dedup::normalize(query);
  const int n_probe = args.n_probe.value_or(index.k());
  if (n_probe < 1) {
    io.err << "error: --n-probe must be >= 1\n";
    return kExitUsage;
  }
  json hits = json::array();
  for (const auto& h : index.search(query, args.top_k, n_probe)) {
    hits.push_back({{"clip_id", h.clip_id}, {"similarity", h.similarity}});
  }
  io.emit({{"results", hits}, {"n_probe", n_probe}, {"indexed", index.size()}});
  return kExitOk;
}

int cmd_detect(const Config& config, const std::string& video, const std::string& out_path, const CommandIo& io) {
  std::ifstream in(video, std::ios::binary);
  if (!in) {
    io.err << "error: cannot open " << video << '\n';
    return kExitUsage;
  }
  frame_io::Y4mReader reader(in);
  splitter::HistogramShotDetector detector({config.split.threshold, config.split.min_scene_len, config.split.bins});
  std::ofstream out(out_path);
  if (!out) {
    io.err << "error: cannot write " << out_path << '\n';
    return kExitUsage;
  }
  std::int64_t count = 0;
  for (const auto& f : reader) {
    if (auto b = detector.feed(frame_io::to_rgb(f, reader.header()))) {
      out << json{{"frame", b->frame_index}, {"confidence", b->confidence}}.dump() << '\n';
      ++count;
    }
  }
  io.emit({{"video", video}, {"frames", detector.frames_seen()}, {"boundaries", count}, {"output", out_path}});
  return kExitOk;
}

int cmd_export(const Config& config, const std::string& dir, const std::string& status, const CommandIo& io) {
  shard::ManifestFilter filter;
  try {
    filter.status = shard::parse_status(status);
  } catch (const std::exception&) {
    io.err << "error: unknown status " << status << '\n';
    return kExitUsage;
  }
  shard::ManifestStore store(config.manifest);
  const auto scan = store.scan(filter);
  fs::create_directories(dir);

  std::map<std::string, frame_io::TranscodeJob> by_source;
  for (const auto& e : scan.entries) {
    auto& job = by_source[e.source_id];
    job.source_id = e.source_id;
    job.input_path = detail::source_path(config, e.source_id);
    job.ranges.push_back({e.start_frame, e.end_frame});
    job.outputs.push_back((fs::path(dir) / (e.clip_id + ".y4m")).string());
  }
  std::vector<frame_io::TranscodeJob> jobs;
  for (auto& [_, job] : by_source) {
    // Clip ids sort by start frame within a source, but be explicit.
    std::vector<std::size_t> order(job.ranges.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return job.ranges[a].start < job.ranges[b].start; });
    frame_io::TranscodeJob sorted = job;
    for (std::size_t i = 0; i < order.size(); ++i) {
      sorted.ranges[i] = job.ranges[order[i]];
      sorted.outputs[i] = job.outputs[order[i]];
    }
    jobs.push_back(std::move(sorted));
  }

  json results = json::array();
  json throughput;
  std::size_t failed = 0;
  if (config.transcoder.command_template.empty()) {
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t completed = 0;
    for (const auto& job : jobs) {
      try {
        frame_io::trim_y4m(job.input_path, job.ranges, job.outputs);
        ++completed;
        for (const auto& o : job.outputs) results.push_back({{"output", o}, {"status", "ok"}});
      } catch (const std::exception& e) {
        ++failed;
        for (const auto& o : job.outputs) results.push_back({{"output", o}, {"status", "failed"}, {"detail", e.what()}});
      }
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    throughput = {{"invocations", jobs.size()}, {"completed_sources", completed}, {"failed_sources", failed},
                  {"wall_seconds", wall}, {"videos_per_second", wall > 0 ? completed / wall : 0.0}};
  } else {
    const frame_io::TranscoderClient client{config.transcoder.command_template, config.transcoder.max_parallel};
    try {
      client.validate_template();
    } catch (const frame_io::TemplateError& e) {
      io.err << "config error: " << e.what() << '\n';
      return kExitUsage;
    }
    const auto outcome = frame_io::run_transcode(jobs, client);
    for (const auto& r : outcome.results) {
      const bool ok = r.status == frame_io::TranscodeStatus::Ok;
      results.push_back({{"output", r.output_path}, {"status", ok ? "ok" : "failed"}, {"exit_code", r.exit_code}});
    }
    const auto& t = outcome.report;
    failed = t.failed_sources;
    throughput = {{"invocations", t.invocations}, {"completed_sources", t.completed_sources},
                  {"failed_sources", t.failed_sources}, {"wall_seconds", t.wall_seconds},
                  {"videos_per_second", t.videos_per_second}};
  }
  io.emit({{"command", "export"}, {"clips", scan.entries.size()}, {"results", results}, {"throughput", throughput}});
  return failed == 0 ? kExitOk : kExitPartial;
}

namespace {

std::vector<orchestrator::NodeSpec> load_nodes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open nodes file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("nodes file " + path + ": " + e.what());
  }
  const json& arr = j.is_object() ? j.at("nodes") : j;
  std::vector<orchestrator::NodeSpec> nodes;
  for (const auto& n : arr) {
    nodes.push_back({n.at("node_id").get<std::string>(), orchestrator::ResourceVector::from_json(n.at("capacity"))});
  }
  return nodes;
}

orchestrator::PipelineGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pipeline file " + path);
  try {
    return orchestrator::PipelineGraph::from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("pipeline file " + path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

int cmd_schedule(const std::string& pipeline_path, const std::string& nodes_path, const CommandIo& io) {
  const auto graph = load_graph(pipeline_path);
  const auto nodes = load_nodes(nodes_path);
  try {
    const auto a = orchestrator::schedule(graph.stages, nodes);
    io.emit(a.to_json(graph.stages, nodes));
  } catch (const orchestrator::Infeasible& e) {
    io.err << "error: infeasible: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_simulate(const std::string& pipeline_path, const std::string& nodes_path, std::int64_t items,
                 std::uint64_t seed, bool exponential, const CommandIo& io) {
  const auto graph = load_graph(pipeline_path);
  const auto nodes = load_nodes(nodes_path);
  orchestrator::Allocation a;
  try {
    a = orchestrator::schedule(graph.stages, nodes);
  } catch (const orchestrator::Infeasible& e) {
    io.err << "error: infeasible: " << e.what() << '\n';
    return kExitUsage;
  }
  orchestrator::SimulationOptions opts;
  opts.item_count = items;
  opts.seed = seed;
  opts.distribution =
      exponential ? orchestrator::ServiceDistribution::Exponential : orchestrator::ServiceDistribution::Deterministic;
  const auto report = orchestrator::simulate(graph, a, nodes, opts);
  auto j = report.to_json();
  j["allocation"] = a.to_json(graph.stages, nodes);
  io.emit(j);
  return report.dead_letters.empty() ? kExitOk : kExitPartial;
}

}  // namespace curator::cli
