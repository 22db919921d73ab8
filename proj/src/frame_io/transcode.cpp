#include "curator/frame_io/transcode.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>
#include <thread>

#include "curator/frame_io/y4m.hpp"

namespace curator::frame_io {
namespace {

constexpr const char* kPlaceholders[] = {"{input}", "{start}", "{end}", "{output}"};

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

}  // namespace

void TranscodeJob::validate() const {
  if (ranges.empty()) throw std::invalid_argument("transcode job " + source_id + " has no ranges");
  if (ranges.size() != outputs.size()) {
    throw std::invalid_argument("transcode job " + source_id + ": ranges/outputs size mismatch");
  }
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const auto& r = ranges[i];
    if (r.start < 0 || r.start >= r.end) {
      throw std::invalid_argument("transcode job " + source_id + ": empty or negative range");
    }
    if (i > 0 && r.start < ranges[i - 1].end) {
      throw std::invalid_argument("transcode job " + source_id + ": overlapping ranges");
    }
    if (source_length && r.end > *source_length) {
      throw std::invalid_argument("transcode job " + source_id + ": range past end of source");
    }
  }
}

void TranscoderClient::validate_template() const {
  for (const char* ph : kPlaceholders) {
    if (command_template.find(ph) == std::string::npos) {
      throw TemplateError(std::string("transcoder template lacks ") + ph);
    }
  }
}

std::string TranscoderClient::render(const TranscodeJob& job) const {
  validate_template();
  std::string cmd = command_template;
  replace_all(cmd, "{input}", job.input_path);
  replace_all(cmd, "{start}", join(job.ranges, [](const FrameRange& r) { return std::to_string(r.start); }));
  replace_all(cmd, "{end}", join(job.ranges, [](const FrameRange& r) { return std::to_string(r.end); }));
  replace_all(cmd, "{output}", join(job.outputs, [](const std::string& s) { return s; }));
  static const std::regex leftover(R"(\{[A-Za-z_]+\})");
  std::smatch m;
  if (std::regex_search(cmd, m, leftover)) {
    throw TemplateError("transcoder template has unresolved placeholder " + m.str());
  }
  return cmd;
}

TranscodeOutcome run_transcode(const std::vector<TranscodeJob>& jobs,
                               const TranscoderClient& client) {
  TranscodeOutcome outcome;
  if (jobs.empty()) return outcome;
  client.validate_template();

  // Merge jobs per source, keeping first-seen source order.
  std::vector<TranscodeJob> batches;
  std::map<std::string, std::size_t> slot;
  for (const auto& job : jobs) {
    auto [it, inserted] = slot.try_emplace(job.source_id, batches.size());
    if (inserted) {
      batches.push_back(job);
      continue;
    }
    auto& batch = batches[it->second];
    batch.ranges.insert(batch.ranges.end(), job.ranges.begin(), job.ranges.end());
    batch.outputs.insert(batch.outputs.end(), job.outputs.begin(), job.outputs.end());
  }
  std::vector<std::string> commands;
  for (auto& batch : batches) {
    std::vector<std::size_t> order(batch.ranges.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return batch.ranges[a].start < batch.ranges[b].start;
    });
    TranscodeJob sorted = batch;
    for (std::size_t i = 0; i < order.size(); ++i) {
      sorted.ranges[i] = batch.ranges[order[i]];
      sorted.outputs[i] = batch.outputs[order[i]];
    }
    batch = std::move(sorted);
    batch.validate();
    commands.push_back(client.render(batch));
  }

  std::vector<std::vector<TranscodeResult>> per_batch(batches.size());
  std::atomic<std::size_t> next{0};
  const auto t0 = std::chrono::steady_clock::now();
  auto worker = [&] {
    for (std::size_t i = next++; i < batches.size(); i = next++) {
      const int raw = std::system(commands[i].c_str());
      int code = raw;
      if (raw != -1 && WIFEXITED(raw)) code = WEXITSTATUS(raw);
      for (const auto& out : batches[i].outputs) {
        TranscodeResult r;
        r.output_path = out;
        r.source_id = batches[i].source_id;
        r.exit_code = code;
        if (code != 0) {
          r.status = TranscodeStatus::ProcessFailure;
          r.detail = "transcoder exited with status " + std::to_string(code);
        }
        per_batch[i].push_back(std::move(r));
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(client.max_parallel,
                                                          static_cast<unsigned>(batches.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  const auto t1 = std::chrono::steady_clock::now();

  auto& rep = outcome.report;
  rep.invocations = batches.size();
  for (auto& results : per_batch) {
    const bool ok = std::all_of(results.begin(), results.end(), [](const TranscodeResult& r) {
      return r.status == TranscodeStatus::Ok;
    });
    ok ? ++rep.completed_sources : ++rep.failed_sources;
    std::move(results.begin(), results.end(), std::back_inserter(outcome.results));
  }
  rep.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  rep.videos_per_second =
      rep.wall_seconds > 0.0 ? static_cast<double>(rep.completed_sources) / rep.wall_seconds : 0.0;
  return outcome;
}

void trim_y4m(const std::string& input_path, const std::vector<FrameRange>& ranges,
              const std::vector<std::string>& outputs) {
  if (ranges.size() != outputs.size()) {
    throw std::invalid_argument("trim: ranges/outputs size mismatch");
  }
  std::ifstream in(input_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + input_path);
  Y4mReader reader(in);
  StreamHeader out_header = reader.header();

  std::vector<std::size_t> order(ranges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ranges[a].start < ranges[b].start; });

  std::vector<Frame> buffer;
  std::size_t cursor = 0;
  while (cursor < order.size()) {
    auto frame = reader.next();
    if (!frame) throw std::runtime_error("trim: source ended before range end");
    // Ranges may be consumed in start order only if they do not overlap.
    const auto& r = ranges[order[cursor]];
    if (frame->pts_index >= r.start && frame->pts_index < r.end) {
      buffer.push_back(std::move(*frame));
    }
    if (buffer.size() == static_cast<std::size_t>(r.end - r.start)) {
      out_header.frame_count = r.end - r.start;
      write_y4m_file(outputs[order[cursor]], out_header, buffer);
      buffer.clear();
      ++cursor;
    }
  }
}

}  // namespace curator::frame_io
