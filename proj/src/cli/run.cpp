#include <deque>
#include <filesystem>
#include <iostream>

#include "curator/cli/commands.hpp"
#include "curator/filters/quality.hpp"
#include "curator/filters/resample.hpp"
#include "curator/orchestrator/pipeline.hpp"
#include "curator/orchestrator/scheduler.hpp"
#include "curator/orchestrator/simulator.hpp"
#include "stage_ops.hpp"

namespace curator::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using orchestrator::StageKind;
using orchestrator::StageSpec;
using shard::ClipStatus;
using shard::ManifestEntry;

namespace {

struct RunItem {
  ManifestEntry entry;
  std::vector<float> embedding;
  double quality = 0.0;
};

// Default per-replica demand and service time; config may override by name.
std::vector<StageSpec> default_stages(const Config& config) {
  auto s = [](std::string name, orchestrator::ResourceVector demand, double t, StageKind kind = StageKind::Streaming) {
    StageSpec spec;
    spec.name = std::move(name);
    spec.demand = std::move(demand);
    spec.service_time = t;
    spec.kind = kind;
    return spec;
  };
  std::vector<StageSpec> stages{
      s("motion", {{"cpu", 1}, {"decode", 1}}, 0.05),
      s("quality", {{"accel", 0.25}, {"net", 0.5}}, 0.02),
      s("quality_cut", {{"cpu", 1}}, 0.001, StageKind::Barrier),
      s("aesthetic", {{"accel", 0.25}, {"net", 0.5}}, 0.02),
      s("embed", {{"accel", 0.25}, {"net", 0.5}}, 0.03),
  };
  if (config.filter.resample) stages.push_back(s("resample", {{"cpu", 1}}, 0.001, StageKind::Barrier));
  stages.push_back(s("annotate", {{"accel", 0.5}, {"net", 0.5}}, 0.1));
  stages.push_back(s("dedup", {{"cpu", 2}}, 0.01, StageKind::Barrier));
  stages.push_back(s("shard", {{"cpu", 1}, {"net", 1}}, 0.01, StageKind::Barrier));
  stages[2].drop_fraction = config.filter.quality_fraction;

  const auto& ov = config.pipeline.stage_overrides;
  for (auto& st : stages) {
    if (!ov.contains(st.name)) continue;
    const auto& o = ov[st.name];
    try {
      if (o.contains("demand")) st.demand = orchestrator::ResourceVector::from_json(o["demand"]);
      st.service_time = o.value("service_time_hint", st.service_time);
      st.queue_capacity = o.value("queue_capacity", st.queue_capacity);
    } catch (const std::exception& e) {
      throw ConfigError("pipeline.stages." + st.name + ": " + e.what());
    }
    st.validate();
  }
  for (const auto& [name, _] : ov.items()) {
    if (std::none_of(stages.begin(), stages.end(), [&](const StageSpec& st) { return st.name == name; })) {
      throw ConfigError("pipeline.stages names unknown stage " + name);
    }
  }
  return stages;
}

void append_terminal(shard::ManifestStore& store, ManifestEntry e, ClipStatus status, std::string reason) {
  e.status = status;
  e.reason = std::move(reason);
  store.append(e);
}

}  // namespace

int cmd_run(const Config& config, const Services& services, bool simulate, const CommandIo& io) {
  const auto graph = orchestrator::PipelineGraph::chain(default_stages(config));
  orchestrator::Allocation allocation;
  try {
    allocation = orchestrator::schedule(graph.stages, config.pipeline.nodes);
  } catch (const orchestrator::Infeasible& e) {
    io.err << "error: pipeline does not fit the configured nodes: " << e.what() << '\n';
    return kExitUsage;
  }
  const auto sources = detail::list_sources(config);

  if (simulate) {
    // Only the report is written: clip counts come from an in-memory split.
    std::int64_t clips = 0;
    const auto done = detail::split_sources(shard::scan_manifest(config.manifest));
    for (const auto& s : sources) {
      if (!done.count(s)) clips += static_cast<std::int64_t>(detail::split_source(config, services, s).size());
    }
    orchestrator::SimulationOptions opts;
    opts.item_count = clips;
    opts.seed = config.pipeline.seed;
    auto report = orchestrator::simulate(graph, allocation, config.pipeline.nodes, opts).to_json();
    report["allocation"] = allocation.to_json(graph.stages, config.pipeline.nodes);
    io.emit(report);
    return kExitOk;
  }

  shard::ManifestStore store(config.manifest);
  for (const auto& w : store.scan().warnings) io.err << "warning: " << w << '\n';
  const auto already = detail::split_sources(store.scan());
  const auto classifiers = detail::Classifiers::load(config);
  detail::EmbeddingStore embeddings((fs::path(config.work_dir) / detail::kEmbeddingsFile).string());
  detail::CaptionStore captions((fs::path(config.work_dir) / detail::kCaptionsFile).string());

  // Source: split one video at a time and hand out its clips.
  std::size_t next_source = 0;
  std::deque<ManifestEntry> pending;
  json split_failures = json::array();
  std::size_t new_sources = 0;
  auto source = [&]() -> std::optional<RunItem> {
    while (pending.empty() && next_source < sources.size()) {
      const auto& id = sources[next_source++];
      if (already.count(id)) continue;
      ++new_sources;
      try {
        for (auto& e : detail::split_source(config, services, id)) {
          store.append(e);
          pending.push_back(std::move(e));
        }
      } catch (const std::exception& e) {
        split_failures.push_back({{"source_id", id}, {"error", e.what()}});
      }
    }
    if (pending.empty()) return std::nullopt;
    RunItem item{std::move(pending.front()), {}, 0.0};
    pending.pop_front();
    return item;
  };

  using Impl = orchestrator::StageImpl<RunItem>;
  std::vector<Impl> impls;
  for (const auto& st : graph.stages) {
    Impl impl;
    if (st.name == "motion") {
      impl.streaming = [&](RunItem& it) {
        const auto clip = detail::load_clip(config, it.entry);
        const auto v = detail::motion_verdict(config, it.entry, clip);
        for (const auto& [k, s] : v.scores) it.entry.scores[k] = s;
        it.entry.tags.insert(v.tags.begin(), v.tags.end());
        if (!v.pass) append_terminal(store, it.entry, ClipStatus::FilteredOut, std::string(filters::to_string(v.reason)));
        return v.pass;
      };
    } else if (st.name == "quality") {
      impl.streaming = [&](RunItem& it) {
        const auto clip = detail::load_clip(config, it.entry);
        it.quality = services.quality->score(it.entry.clip_id, detail::sample_rgb(clip));
        it.entry.scores["quality"] = it.quality;
        return true;
      };
    } else if (st.name == "quality_cut") {
      impl.barrier = [&](std::vector<RunItem>& items) {
        std::vector<filters::ScoredClip> scored;
        for (const auto& it : items) scored.push_back({it.entry.clip_id, it.quality});
        const auto cut = filters::percentile_cut(scored, config.filter.quality_fraction);
        const std::set<std::string> removed(cut.removed.begin(), cut.removed.end());
        std::vector<bool> keep;
        for (const auto& it : items) {
          const bool k = !removed.count(it.entry.clip_id);
          if (!k) append_terminal(store, it.entry, ClipStatus::FilteredOut, "low_quality");
          keep.push_back(k);
        }
        return keep;
      };
    } else if (st.name == "aesthetic") {
      impl.streaming = [&](RunItem& it) {
        const auto clip = detail::load_clip(config, it.entry);
        const double a = services.aesthetic->score(it.entry.clip_id, detail::sample_rgb(clip));
        it.entry.scores["aesthetic"] = a;
        const bool pass = filters::aesthetic_gate(a, config.filter.aesthetic_threshold);
        if (!pass) append_terminal(store, it.entry, ClipStatus::FilteredOut, "low_aesthetic");
        return pass;
      };
    } else if (st.name == "embed") {
      impl.streaming = [&](RunItem& it) {
        const auto clip = detail::load_clip(config, it.entry);
        auto v = services.embedder->embed(it.entry.clip_id, detail::sample_rgb(clip));
        if (static_cast<int>(v.size()) != config.dedup.embedding_dim || !dedup::normalize(v)) {
          throw ServiceError(ServiceError::Kind::Malformed, "bad embedding for " + it.entry.clip_id);
        }
        embeddings.put(it.entry.clip_id, v);
        it.entry.embedding_ref = embeddings.ref(it.entry.clip_id);
        it.embedding = std::move(v);
        filters::FilterVerdict verdict;
        verdict.clip_id = it.entry.clip_id;
        detail::classify_embedding(config, classifiers, it.embedding, verdict);
        for (const auto& [k, s] : verdict.scores) it.entry.scores[k] = s;
        it.entry.tags.insert(verdict.tags.begin(), verdict.tags.end());
        if (!verdict.pass) {
          append_terminal(store, it.entry, ClipStatus::FilteredOut, std::string(filters::to_string(verdict.reason)));
          return false;
        }
        it.entry.tags.insert(detail::kPassedTag);
        return true;
      };
    } else if (st.name == "resample") {
      impl.barrier = [&](std::vector<RunItem>& items) {
        std::vector<bool> keep(items.size(), true);
        std::map<std::string, double> observed;
        for (const auto& it : items) {
          for (const auto& t : it.entry.tags) {
            if (t.rfind("type:", 0) == 0) observed[t.substr(5)] += 1.0 / static_cast<double>(items.size());
          }
        }
        filters::CategoryDistribution target;
        for (const auto& [name, share] : filters::default_category_targets()) target[name] = share;
        if (observed.size() != target.size()) return keep;  // categories missing: leave the mix alone
        const auto acceptance = filters::resample_weights(observed, target);
        for (std::size_t i = 0; i < items.size(); ++i) {
          for (const auto& t : items[i].entry.tags) {
            if (t.rfind("type:", 0) != 0) continue;
            if (!filters::accept_sample(acceptance.at(t.substr(5)), items[i].entry.clip_id, config.filter.resample_seed)) {
              keep[i] = false;
              append_terminal(store, items[i].entry, ClipStatus::FilteredOut, "resampled_out");
            }
          }
        }
        return keep;
      };
    } else if (st.name == "annotate") {
      impl.streaming = [&](RunItem& it) {
        const auto requests = detail::caption_requests(config, it.entry);
        std::shared_ptr<annotate::CaptionClient> captioner = services.captioner;
        if (!captioner) {
          captioner = std::make_shared<annotate::HttpCaptioner>(
              HttpEndpoint::parse(config.endpoints.caption), detail::frame_provider(config, {{it.entry.clip_id, it.entry}}));
        }
        const auto batch = annotate::caption_corpus(requests, *captioner, detail::retry_policy(config), 1);
        if (!batch.failures.empty()) throw std::runtime_error("captioning failed: " + batch.failures.front().message);
        it.entry.caption_refs = captions.put(batch.captions);
        it.entry.status = ClipStatus::Annotated;
        store.append(it.entry);
        return true;
      };
    } else if (st.name == "dedup") {
      impl.barrier = [&](std::vector<RunItem>& items) {
        std::vector<ManifestEntry> entries;
        for (const auto& it : items) entries.push_back(it.entry);
        const auto outcome = detail::run_dedup(config, entries, embeddings);
        std::vector<bool> keep;
        for (auto& it : items) {
          const auto r = outcome.removed.find(it.entry.clip_id);
          if (r != outcome.removed.end()) {
            append_terminal(store, it.entry, ClipStatus::DedupedOut, "duplicate_of:" + r->second);
            keep.push_back(false);
          } else {
            it.entry.tags.insert(detail::kKeptTag);
            keep.push_back(true);
          }
        }
        return keep;
      };
    } else if (st.name == "shard") {
      impl.barrier = [&](std::vector<RunItem>& items) {
        std::vector<ManifestEntry> entries;
        for (const auto& it : items) entries.push_back(it.entry);
        std::vector<std::string> warnings;
        const auto sharded = detail::shard_entries(config, entries, warnings);
        for (std::size_t i = 0; i < items.size(); ++i) {
          items[i].entry = sharded[i];
          store.append(sharded[i]);
        }
        for (const auto& w : warnings) io.err << "warning: " << w << '\n';
        return std::vector<bool>(items.size(), true);
      };
    }
    impls.push_back(std::move(impl));
  }

  orchestrator::LiveOptions<RunItem> options;
  options.label = [](const RunItem& it) { return it.entry.clip_id; };
  auto result = orchestrator::run_pipeline<RunItem>(graph, impls, allocation, source, options);
  detail::rebuild_search_index(config, store.scan(), embeddings);

  auto report = result.report.to_json();
  report["allocation"] = allocation.to_json(graph.stages, config.pipeline.nodes);
  report["sources"] = new_sources;
  report["split_failures"] = split_failures;
  report["manifest"] = detail::status_counts(store.scan());
  io.emit(report);
  const bool clean = result.report.dead_letters.empty() && !result.report.aborted && split_failures.empty();
  return clean ? kExitOk : kExitPartial;
}

}  // namespace curator::cli
