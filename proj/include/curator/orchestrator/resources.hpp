#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace curator::orchestrator {

/// Named non-negative amounts per resource kind (cpu, decode, accel, net, ...).
/// Missing kinds read as zero.
class ResourceVector {
 public:
  ResourceVector() = default;
  ResourceVector(std::initializer_list<std::pair<const std::string, double>> init);

  double get(const std::string& kind) const;
  void set(const std::string& kind, double amount);
  const std::map<std::string, double>& amounts() const { return amounts_; }

  /// Every entry of *this <= the same entry of `capacity`.
  bool fits_within(const ResourceVector& capacity, double slack = 1e-9) const;
  double l1() const;

  ResourceVector& operator+=(const ResourceVector& other);
  ResourceVector& operator-=(const ResourceVector& other);
  friend ResourceVector operator*(const ResourceVector& v, double k);
  bool operator==(const ResourceVector&) const = default;

  nlohmann::json to_json() const { return amounts_; }
  static ResourceVector from_json(const nlohmann::json& j);

 private:
  std::map<std::string, double> amounts_;
};

enum class StageKind { Streaming, Barrier };

struct StageSpec {
  std::string name;
  ResourceVector demand;        // per replica
  double service_time = 1.0;    // mean seconds per item
  StageKind kind = StageKind::Streaming;
  int queue_capacity = 8;       // input queue bound
  // Simulation-only behaviour.
  double drop_fraction = 0.0;   // streaming: per-item drop probability; barrier: exact share dropped
  double failure_rate = 0.0;    // per-attempt failure probability

  void validate() const;
};

struct NodeSpec {
  std::string node_id;
  ResourceVector capacity;
};

/// Stage graph: stages plus directed edges by index. Stages without
/// predecessors read from the source; stages without successors are sinks.
struct PipelineGraph {
  std::vector<StageSpec> stages;
  std::vector<std::pair<int, int>> edges;

  /// Throws std::invalid_argument on bad indices, cycles or invalid stages.
  void validate() const;
  std::vector<int> topological_order() const;
  std::vector<std::vector<int>> successors() const;
  std::vector<std::vector<int>> predecessors() const;
  int index_of(const std::string& name) const;

  /// {stages:[{name, kind, demand, service_time_hint, queue_capacity}], edges:[[from,to]]}
  /// Edge endpoints may be stage names or indices. A missing "edges" key
  /// chains the stages in listed order.
  static PipelineGraph from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static PipelineGraph chain(std::vector<StageSpec> stages);
};

struct Allocation {
  std::vector<int> replicas;                  // per stage
  std::vector<std::vector<int>> placement;    // [node][stage] replica counts
  double predicted_throughput = 0.0;          // min over stages of replicas / service_time

  /// Checks the node-capacity and >=1-replica invariants.
  bool valid_for(const std::vector<StageSpec>& stages, const std::vector<NodeSpec>& nodes) const;
  nlohmann::json to_json(const std::vector<StageSpec>& stages,
                         const std::vector<NodeSpec>& nodes) const;
};

double predicted_throughput(const std::vector<StageSpec>& stages, const std::vector<int>& replicas);

}  // namespace curator::orchestrator
