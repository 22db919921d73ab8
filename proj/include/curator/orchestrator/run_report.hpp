#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace curator::orchestrator {

struct StageReport {
  std::string name;
  int replicas = 0;
  std::int64_t in = 0;
  std::int64_t out = 0;
  std::int64_t filtered = 0;
  std::int64_t failed = 0;
  std::int64_t retries = 0;
  std::int64_t peak_queue_depth = 0;
  int queue_capacity = 0;
  double busy_time = 0.0;
  double utilization = 0.0;
};

struct DeadLetter {
  std::string stage;
  std::int64_t item = 0;
  std::string label;
  std::string error;
};

struct RunReport {
  std::string mode;  // "simulated" | "live"
  std::vector<StageReport> stages;
  std::vector<std::pair<int, int>> edges;
  std::int64_t items_in = 0;
  std::int64_t items_delivered = 0;
  std::vector<DeadLetter> dead_letters;
  double duration = 0.0;
  double throughput = 0.0;  // steady-state items/s at the sinks
  std::int64_t peak_buffered = 0;
  std::int64_t buffer_bound = 0;  // sum of queue capacities
  bool memory_bound_held = true;
  bool oversubscribed = false;
  bool aborted = false;
  std::string abort_reason;

  /// Per stage in = out + filtered + failed; roots receive items_in; every
  /// other stage receives the sum of its predecessors' out; sinks deliver.
  bool conservation_holds() const;
  nlohmann::json to_json() const;
  std::string to_json_string() const { return to_json().dump(2); }
};

}  // namespace curator::orchestrator
