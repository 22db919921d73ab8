// curator: command-line entry point for the video curation pipeline.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "curator/cli/commands.hpp"
#include "curator/cli/synth.hpp"
#include "curator/frame_io/transcode.hpp"

namespace {

std::vector<std::int64_t> parse_list(const std::string& s) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoll(item));
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace curator::cli;
  CLI::App app{"Video curation pipeline: split, filter, annotate, dedup, shard"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path, manifest, report;
  std::string profile = "pretrain";
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--manifest", manifest, "manifest path (overrides the config)");
  app.add_option("--report", report, "write the JSON report here instead of stdout");
  app.add_option("--profile", profile, "pretrain or finetune")->check(CLI::IsMember({"pretrain", "finetune"}));

  auto* split = app.add_subcommand("split", "detect shots and register clips");
  auto* filter = app.add_subcommand("filter", "motion, quality, aesthetic and content filters");
  auto* annotate = app.add_subcommand("annotate", "caption passing clips");
  auto* dedup = app.add_subcommand("dedup", "semantic deduplication and search index");
  auto* shard = app.add_subcommand("shard", "write bucketed tar shards");

  bool simulate = false;
  auto* run = app.add_subcommand("run", "full streaming pipeline");
  run->add_flag("--simulate", simulate, "virtual-clock run; only the report is written");

  std::string pred, gt;
  std::int64_t tolerance = 2;
  auto* eval = app.add_subcommand("eval-split", "precision/recall of shot boundaries");
  eval->add_option("pred", pred, "predicted boundaries (JSONL)")->required();
  eval->add_option("gt", gt, "ground-truth boundaries (JSONL)")->required();
  eval->add_option("--tolerance", tolerance, "match tolerance in frames");

  SearchArgs search_args;
  std::size_t topk = 10;
  std::optional<int> n_probe;
  auto* search = app.add_subcommand("search", "nearest clips by embedding");
  search->add_option("--query-clip", search_args.query_clip, "clip id whose embedding is the query");
  search->add_option("--vector-file", search_args.vector_file, "JSON array query vector");
  search->add_option("--text", search_args.text, "text query (needs a text embedder)");
  search->add_option("--topk", topk, "results to return");
  search->add_option("--n-probe", n_probe, "clusters to scan (default: all)");

  std::string video, out_path;
  auto* detect = app.add_subcommand("detect", "histogram shot detection on one video");
  detect->add_option("video", video)->required();
  detect->add_option("-o,--output", out_path, "boundary JSONL output")->required();

  std::string synth_dir;
  int synth_count = 5, synth_cuts = 4;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "write synthetic test videos with ground truth");
  synth->add_option("dir", synth_dir)->required();
  synth->add_option("--count", synth_count);
  synth->add_option("--max-cuts", synth_cuts);
  synth->add_option("--seed", synth_seed);

  std::string trim_input, trim_starts, trim_ends, trim_outputs;
  auto* trim = app.add_subcommand("trim", "cut frame ranges out of a y4m file");
  trim->add_option("--input", trim_input)->required();
  trim->add_option("--start", trim_starts, "comma-separated start frames")->required();
  trim->add_option("--end", trim_ends, "comma-separated end frames (exclusive)")->required();
  trim->add_option("--output", trim_outputs, "comma-separated output paths")->required();

  std::string export_dir, export_status = "sharded";
  auto* exp = app.add_subcommand("export", "transcode manifest clips to files, one invocation per source");
  exp->add_option("dir", export_dir, "output directory")->required();
  exp->add_option("--status", export_status, "manifest status to export");

  std::string pipeline_path, nodes_path;
  auto* sched = app.add_subcommand("schedule", "replica allocation for a pipeline definition");
  sched->add_option("--pipeline", pipeline_path)->required();
  sched->add_option("--nodes", nodes_path)->required();

  std::int64_t sim_items = 1000;
  std::uint64_t sim_seed = 0;
  bool sim_exp = false;
  auto* sim = app.add_subcommand("simulate", "virtual-clock run of a pipeline definition");
  sim->add_option("--pipeline", pipeline_path)->required();
  sim->add_option("--nodes", nodes_path)->required();
  sim->add_option("--items", sim_items);
  sim->add_option("--seed", sim_seed);
  sim->add_flag("--exponential", sim_exp, "exponential service times");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const CommandIo io{std::cout, std::cerr, report};
  try {
    if (eval->parsed()) return cmd_eval_split(pred, gt, tolerance, io);
    if (sched->parsed()) return cmd_schedule(pipeline_path, nodes_path, io);
    if (sim->parsed()) return cmd_simulate(pipeline_path, nodes_path, sim_items, sim_seed, sim_exp, io);
    if (synth->parsed()) {
      nlohmann::json items = nlohmann::json::array();
      for (const auto& it : write_synthetic_corpus(synth_dir, synth_count, synth_cuts, synth_seed)) {
        items.push_back({{"source_id", it.source_id}, {"path", it.path}, {"gt", it.gt_path}, {"cuts", it.cuts}});
      }
      io.emit({{"videos", items}});
      return kExitOk;
    }
    if (trim->parsed()) {
      const auto starts = parse_list(trim_starts), ends = parse_list(trim_ends);
      const auto outputs = split_list(trim_outputs);
      if (starts.size() != ends.size() || starts.size() != outputs.size()) {
        std::cerr << "error: --start, --end and --output need the same number of entries\n";
        return kExitUsage;
      }
      std::vector<curator::frame_io::FrameRange> ranges;
      for (std::size_t i = 0; i < starts.size(); ++i) ranges.push_back({starts[i], ends[i]});
      curator::frame_io::trim_y4m(trim_input, ranges, outputs);
      return kExitOk;
    }

    auto config = load_config(config_path, parse_profile(profile));
    if (manifest) config.manifest = *manifest;
    const auto services = Services::from_config(config);
    if (split->parsed()) return cmd_split(config, services, io);
    if (filter->parsed()) return cmd_filter(config, services, io);
    if (annotate->parsed()) return cmd_annotate(config, services, io);
    if (dedup->parsed()) return cmd_dedup(config, services, io);
    if (shard->parsed()) return cmd_shard(config, services, io);
    if (run->parsed()) return cmd_run(config, services, simulate, io);
    if (detect->parsed()) return cmd_detect(config, video, out_path, io);
    if (exp->parsed()) return cmd_export(config, export_dir, export_status, io);
    if (search->parsed()) {
      search_args.top_k = topk;
      search_args.n_probe = n_probe;
      return cmd_search(config, services, search_args, io);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPartial;
  }
  return kExitUsage;
}
