#include "curator/orchestrator/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace curator::orchestrator {

double fragmentation_score(const ResourceVector& remaining, const ResourceVector& capacity) {
  std::vector<double> fr;
  for (const auto& [kind, cap] : capacity.amounts()) {
    if (cap > 0.0) fr.push_back(remaining.get(kind) / cap);
  }
  if (fr.empty()) return 0.0;
  const double mean = std::accumulate(fr.begin(), fr.end(), 0.0) / static_cast<double>(fr.size());
  double var = 0.0;
  for (double f : fr) var += (f - mean) * (f - mean);
  return var / static_cast<double>(fr.size());
}

namespace {

struct Packer {
  const std::vector<StageSpec>& stages;
  const std::vector<NodeSpec>& nodes;
  const std::vector<int>& replicas;
  std::vector<int> order;  // stages, largest demand first
  std::vector<ResourceVector> remaining;
  std::vector<std::vector<int>> placement;
  long budget;

  // Place `left` replicas of order[pos] on nodes >= node, then recurse.
  bool place(std::size_t pos, std::size_t node, int left) {
    if (--budget < 0) return false;
    if (pos == order.size()) return true;
    const int s = order[pos];
    if (left == 0) return place(pos + 1, 0, pos + 1 < order.size() ? replicas[order[pos + 1]] : 0);
    if (node == nodes.size()) return false;
    const auto& d = stages[s].demand;
    int fit = 0;
    ResourceVector probe = remaining[node];
    while (fit < left && d.fits_within(probe)) {
      probe -= d;
      ++fit;
      if (d.l1() == 0.0) {
        fit = left;
        break;
      }
    }
    for (int take = fit; take >= 0; --take) {
      for (int i = 0; i < take; ++i) remaining[node] -= d;
      placement[node][s] += take;
      if (place(pos, node + 1, left - take)) return true;
      placement[node][s] -= take;
      for (int i = 0; i < take; ++i) remaining[node] += d;
      if (budget < 0) return false;
    }
    return false;
  }
};

std::vector<int> by_demand_desc(const std::vector<StageSpec>& stages) {
  std::vector<int> order(stages.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return stages[a].demand.l1() > stages[b].demand.l1();
  });
  return order;
}

}  // namespace

std::vector<std::vector<int>> pack_exact(const std::vector<StageSpec>& stages,
                                         const std::vector<NodeSpec>& nodes,
                                         const std::vector<int>& replicas, long budget) {
  Packer p{stages, nodes, replicas, by_demand_desc(stages), {}, {}, budget};
  for (const auto& n : nodes) p.remaining.push_back(n.capacity);
  p.placement.assign(nodes.size(), std::vector<int>(stages.size(), 0));
  if (stages.empty()) return p.placement;
  if (!p.place(0, 0, replicas[p.order[0]])) return {};
  return p.placement;
}

Allocation schedule(const std::vector<StageSpec>& stages, const std::vector<NodeSpec>& nodes,
                    const ScheduleOptions& options) {
  if (stages.empty()) throw std::invalid_argument("schedule: no stages");
  for (const auto& s : stages) s.validate();
  for (const auto& s : stages) {
    const bool hostable = std::any_of(nodes.begin(), nodes.end(), [&](const NodeSpec& n) {
      return s.demand.fits_within(n.capacity);
    });
    if (!hostable) throw Infeasible("stage " + s.name + " fits on no node");
  }

  const std::size_t S = stages.size();
  const std::size_t N = nodes.size();
  Allocation a;
  a.replicas.assign(S, 1);
  a.placement.assign(N, std::vector<int>(S, 0));
  std::vector<ResourceVector> remaining;
  for (const auto& n : nodes) remaining.push_back(n.capacity);

  // First-fit decreasing for the initial replica set.
  bool ffd_ok = true;
  for (int s : by_demand_desc(stages)) {
    bool placed = false;
    for (std::size_t n = 0; n < N && !placed; ++n) {
      if (stages[s].demand.fits_within(remaining[n])) {
        remaining[n] -= stages[s].demand;
        a.placement[n][s] = 1;
        placed = true;
      }
    }
    if (!placed) {
      ffd_ok = false;
      break;
    }
  }
  auto adopt = [&](std::vector<std::vector<int>> placement) {
    a.placement = std::move(placement);
    for (std::size_t n = 0; n < N; ++n) {
      remaining[n] = nodes[n].capacity;
      for (std::size_t s = 0; s < S; ++s) {
        for (int i = 0; i < a.placement[n][s]; ++i) remaining[n] -= stages[s].demand;
      }
    }
  };
  if (!ffd_ok) {
    auto packed = pack_exact(stages, nodes, a.replicas, options.repack_budget);
    if (packed.empty()) throw Infeasible("one replica per stage does not fit the nodes");
    adopt(std::move(packed));
  }

  for (;;) {
    // Bottleneck: lowest replicas/service_time among stages still allowed to grow.
    int bottleneck = -1;
    double best = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const double rate = a.replicas[s] / stages[s].service_time;
      if (bottleneck < 0 || rate < best) {
        bottleneck = static_cast<int>(s);
        best = rate;
      }
    }
    if (a.replicas[bottleneck] >= options.max_replicas) break;
    const auto& d = stages[bottleneck].demand;

    int target = -1;
    double target_score = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      if (!d.fits_within(remaining[n])) continue;
      ResourceVector after = remaining[n];
      after -= d;
      const double score = fragmentation_score(after, nodes[n].capacity);
      if (target < 0 || score < target_score - 1e-12) {
        target = static_cast<int>(n);
        target_score = score;
      }
    }
    if (target >= 0) {
      remaining[target] -= d;
      ++a.placement[target][bottleneck];
      ++a.replicas[bottleneck];
      continue;
    }
    // No node has room as placed; a full repack may still fit the grown set.
    std::vector<int> grown = a.replicas;
    ++grown[bottleneck];
    auto packed = pack_exact(stages, nodes, grown, options.repack_budget);
    if (packed.empty()) break;
    a.replicas = std::move(grown);
    adopt(std::move(packed));
  }
  a.predicted_throughput = predicted_throughput(stages, a.replicas);
  return a;
}

}  // namespace curator::orchestrator
