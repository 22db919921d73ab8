#pragma once

#include <cstdint>

#include "curator/orchestrator/resources.hpp"
#include "curator/orchestrator/run_report.hpp"

namespace curator::orchestrator {

enum class ServiceDistribution { Deterministic, Exponential };

struct SimulationOptions {
  std::int64_t item_count = 0;
  std::uint64_t seed = 0;
  ServiceDistribution distribution = ServiceDistribution::Deterministic;
  int retry_budget = 2;
  double warmup_fraction = 0.1;  // deliveries ignored when measuring throughput
};

/// Single-threaded virtual-clock run of `graph` under `allocation`.
/// Replicas are placed per allocation.placement; `nodes` is used only to
/// check that busy replicas never exceed a node's capacity.
RunReport simulate(const PipelineGraph& graph, const Allocation& allocation,
                   const std::vector<NodeSpec>& nodes, const SimulationOptions& options);

}  // namespace curator::orchestrator
