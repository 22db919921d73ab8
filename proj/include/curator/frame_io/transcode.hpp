#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace curator::frame_io {

struct FrameRange {
  std::int64_t start = 0;  // inclusive
  std::int64_t end = 0;    // exclusive
};

/// Clips cut from one source video. Ranges must be ordered, non-overlapping
/// and non-empty; one output path per range.
struct TranscodeJob {
  std::string source_id;
  std::string input_path;
  std::vector<FrameRange> ranges;
  std::vector<std::string> outputs;
  std::optional<std::int64_t> source_length;  // frames, when known
  std::string template_id = "default";

  void validate() const;
};

class TemplateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// External transcoder invoked through a shell command template. The
/// placeholders {input}, {start}, {end} and {output} are required; for a
/// batched invocation {start}, {end} and {output} expand to comma-separated
/// lists in range order.
struct TranscoderClient {
  std::string command_template;
  unsigned max_parallel = 1;

  void validate_template() const;
  std::string render(const TranscodeJob& job) const;
};

enum class TranscodeStatus { Ok, ProcessFailure };

struct TranscodeResult {
  std::string output_path;
  std::string source_id;
  TranscodeStatus status = TranscodeStatus::Ok;
  int exit_code = 0;
  std::string detail;
};

struct ThroughputReport {
  std::size_t invocations = 0;
  std::size_t completed_sources = 0;
  std::size_t failed_sources = 0;
  double wall_seconds = 0.0;
  double videos_per_second = 0.0;
};

struct TranscodeOutcome {
  std::vector<TranscodeResult> results;
  ThroughputReport report;
};

/// Groups jobs by source_id and runs one invocation per source. Process
/// failures are reported per output, never thrown; TemplateError and job
/// validation errors are raised before anything runs.
TranscodeOutcome run_transcode(const std::vector<TranscodeJob>& jobs,
                               const TranscoderClient& client);

/// Built-in y4m trimmer used as the reference transcoder: writes frames
/// [start, end) of `input_path` to each output.
void trim_y4m(const std::string& input_path, const std::vector<FrameRange>& ranges,
              const std::vector<std::string>& outputs);

}  // namespace curator::frame_io
