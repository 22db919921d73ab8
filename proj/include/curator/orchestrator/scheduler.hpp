#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "curator/orchestrator/resources.hpp"

namespace curator::orchestrator {

class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScheduleOptions {
  // Upper bound per stage; only binds for stages whose demand is all zeros.
  int max_replicas = 256;
  // Step budget for the exact repacking search.
  long repack_budget = 200000;
};

/// Variance of remaining/capacity over the resource kinds the node offers.
double fragmentation_score(const ResourceVector& remaining, const ResourceVector& capacity);

/// Exact packing check: can `replicas` of each stage be placed on `nodes`?
/// Returns placement[node][stage] or empty on failure / budget exhaustion.
std::vector<std::vector<int>> pack_exact(const std::vector<StageSpec>& stages,
                                         const std::vector<NodeSpec>& nodes,
                                         const std::vector<int>& replicas, long budget);

/// Starts from one replica per stage (first-fit decreasing by demand L1),
/// then grows the bottleneck stage one replica at a time, placing each on the
/// node with the lowest post-placement fragmentation score.
Allocation schedule(const std::vector<StageSpec>& stages, const std::vector<NodeSpec>& nodes,
                    const ScheduleOptions& options = {});

}  // namespace curator::orchestrator
