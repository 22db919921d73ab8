#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "curator/orchestrator/pipeline.hpp"
#include "curator/orchestrator/resources.hpp"
#include "curator/orchestrator/run_report.hpp"
#include "curator/orchestrator/scheduler.hpp"
#include "curator/orchestrator/simulator.hpp"

using namespace curator::orchestrator;

namespace {

StageSpec stage(const std::string& name, double t, ResourceVector demand,
                StageKind kind = StageKind::Streaming) {
  StageSpec s;
  s.name = name;
  s.service_time = t;
  s.demand = std::move(demand);
  s.kind = kind;
  return s;
}

// Oracle: best min(replicas/service_time) over every placement matrix whose
// per-node demand fits. Returns -1 when no placement gives every stage a replica.
double enumerate_optimum(const std::vector<StageSpec>& stages, const std::vector<NodeSpec>& nodes,
                         int per_node_cap) {
  const std::size_t S = stages.size();
  std::vector<std::vector<std::vector<int>>> options(nodes.size());
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    std::vector<int> counts(S, 0);
    while (true) {
      ResourceVector used;
      for (std::size_t s = 0; s < S; ++s) used += stages[s].demand * counts[s];
      if (used.fits_within(nodes[n].capacity)) options[n].push_back(counts);
      std::size_t i = 0;
      while (i < S && ++counts[i] > per_node_cap) counts[i++] = 0;
      if (i == S) break;
    }
  }
  double best = -1;
  std::vector<int> total(S, 0);
  std::function<void(std::size_t)> go = [&](std::size_t n) {
    if (n == nodes.size()) {
      double tp = 1e300;
      for (std::size_t s = 0; s < S; ++s) {
        if (total[s] == 0) return;
        tp = std::min(tp, total[s] / stages[s].service_time);
      }
      best = std::max(best, tp);
      return;
    }
    for (const auto& c : options[n]) {
      for (std::size_t s = 0; s < S; ++s) total[s] += c[s];
      go(n + 1);
      for (std::size_t s = 0; s < S; ++s) total[s] -= c[s];
    }
  };
  go(0);
  return best;
}

Allocation manual(std::vector<int> replicas, const std::vector<StageSpec>& stages) {
  Allocation a;
  a.replicas = replicas;
  a.placement = {replicas};
  a.predicted_throughput = predicted_throughput(stages, replicas);
  return a;
}

Allocation ones(std::size_t n) {
  Allocation a;
  a.replicas.assign(n, 1);
  a.placement = {a.replicas};
  return a;
}

std::function<std::optional<int>()> counter(int n) {
  auto next = std::make_shared<int>(0);
  return [next, n]() -> std::optional<int> {
    if (*next >= n) return std::nullopt;
    return (*next)++;
  };
}

}  // namespace

TEST(Resources, VectorBasics) {
  ResourceVector v{{"cpu", 2}, {"accel", 0.5}};
  EXPECT_EQ(v.get("cpu"), 2.0);
  EXPECT_EQ(v.get("net"), 0.0);
  EXPECT_DOUBLE_EQ(v.l1(), 2.5);
  EXPECT_THROW(v.set("cpu", -1), std::invalid_argument);
  EXPECT_TRUE(v.fits_within({{"cpu", 2}, {"accel", 1}}));
  EXPECT_FALSE(v.fits_within({{"cpu", 4}}));
  EXPECT_EQ(ResourceVector::from_json(v.to_json()), v);
  EXPECT_DOUBLE_EQ(fragmentation_score({{"cpu", 2}, {"accel", 1}}, {{"cpu", 4}, {"accel", 2}}), 0.0);
  // fractions 1 and 0 -> variance 0.25
  EXPECT_DOUBLE_EQ(fragmentation_score({{"cpu", 4}}, {{"cpu", 4}, {"accel", 2}}), 0.25);
}

TEST(Graph, JsonValidationAndOrder) {
  const auto g = PipelineGraph::from_json(nlohmann::json::parse(R"({
    "stages": [
      {"name": "a", "demand": {"cpu": 1}, "service_time_hint": 0.5},
      {"name": "b", "kind": "barrier", "demand": {"cpu": 1}, "service_time_hint": 1, "queue_capacity": 3},
      {"name": "c", "demand": {"cpu": 1}, "service_time": 2}
    ],
    "edges": [["a", "c"], [2, 1]]})"));
  EXPECT_EQ(g.stages[1].kind, StageKind::Barrier);
  EXPECT_EQ(g.stages[1].queue_capacity, 3);
  EXPECT_EQ(g.topological_order(), (std::vector<int>{0, 2, 1}));
  EXPECT_EQ(PipelineGraph::from_json(g.to_json()).edges, g.edges);

  auto cyclic = g;
  cyclic.edges.push_back({1, 0});
  EXPECT_THROW(cyclic.validate(), std::invalid_argument);
  auto bad = g;
  bad.stages[0].service_time = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);

  const auto chained = PipelineGraph::from_json(nlohmann::json::parse(
      R"({"stages": [{"name": "x", "demand": {}}, {"name": "y", "demand": {}}]})"));
  EXPECT_EQ(chained.edges, (std::vector<std::pair<int, int>>{{0, 1}}));
}

TEST(Scheduler, GoldenTwoStage) {
  const std::vector stages{stage("A", 1, {{"cpu", 1}}), stage("B", 2, {{"cpu", 1}})};
  const std::vector<NodeSpec> nodes{{"n0", {{"cpu", 4}}}};
  const auto a = schedule(stages, nodes);
  EXPECT_TRUE(a.valid_for(stages, nodes));
  EXPECT_GE(a.predicted_throughput, 1.0);
  EXPECT_DOUBLE_EQ(a.predicted_throughput, enumerate_optimum(stages, nodes, 6));
  EXPECT_EQ(a.replicas[1], 2);  // A may take the leftover cpu on the tie
}

TEST(Scheduler, SingleStageFillsTheNode) {
  const std::vector stages{stage("only", 0.5, {{"cpu", 2}})};
  const std::vector<NodeSpec> nodes{{"n", {{"cpu", 7}}}};
  const auto a = schedule(stages, nodes);
  EXPECT_EQ(a.replicas[0], 3);
  EXPECT_DOUBLE_EQ(a.predicted_throughput, 6.0);
}

TEST(Scheduler, MissingResourceIsInfeasible) {
  const std::vector stages{stage("gpu", 1, {{"accel", 1}})};
  const std::vector<NodeSpec> nodes{{"n", {{"cpu", 16}}}};
  EXPECT_THROW(schedule(stages, nodes), Infeasible);
}

TEST(Scheduler, MatchesEnumerationOnSmallInstances) {
  std::mt19937 rng(2024);
  int feasible = 0;
  for (int t = 0; t < 300; ++t) {
    const int S = 1 + int(rng() % 3), N = 1 + int(rng() % 2);
    std::vector<StageSpec> stages;
    for (int s = 0; s < S; ++s) {
      ResourceVector d;
      d.set("cpu", double(rng() % 3));
      d.set("accel", double(rng() % 3));
      if (d.l1() == 0) d.set("cpu", 1);
      stages.push_back(stage("s" + std::to_string(s), double(1 + rng() % 3), d));
    }
    std::vector<NodeSpec> nodes;
    for (int n = 0; n < N; ++n)
      nodes.push_back({"n" + std::to_string(n), {{"cpu", double(rng() % 7)}, {"accel", double(rng() % 7)}}});
    const double best = enumerate_optimum(stages, nodes, 6);
    if (best < 0) {
      EXPECT_THROW(schedule(stages, nodes), Infeasible) << "instance " << t;
      continue;
    }
    ++feasible;
    const auto a = schedule(stages, nodes);
    EXPECT_TRUE(a.valid_for(stages, nodes));
    EXPECT_NEAR(a.predicted_throughput, best, 1e-9) << "instance " << t;
  }
  EXPECT_GT(feasible, 100);
}

TEST(Scheduler, Deterministic) {
  const std::vector stages{stage("a", 0.05, {{"cpu", 1}, {"decode", 1}}),
                           stage("b", 0.02, {{"accel", 0.25}, {"net", 0.5}}),
                           stage("c", 0.1, {{"accel", 0.5}, {"net", 0.5}})};
  const std::vector<NodeSpec> nodes{{"x", {{"cpu", 8}, {"decode", 2}, {"accel", 2}, {"net", 4}}},
                                    {"y", {{"cpu", 8}, {"decode", 2}, {"accel", 2}, {"net", 4}}}};
  const auto a = schedule(stages, nodes), b = schedule(stages, nodes);
  EXPECT_EQ(a.replicas, b.replicas);
  EXPECT_EQ(a.placement, b.placement);
}

TEST(Simulate, GoldenThroughput) {
  const auto g = PipelineGraph::chain({stage("A", 1, {{"cpu", 1}}), stage("B", 2, {{"cpu", 1}})});
  const std::vector<NodeSpec> nodes{{"n0", {{"cpu", 4}}}};
  const auto alloc = schedule(g.stages, nodes);
  const auto r = simulate(g, alloc, nodes, {1000, 1});
  EXPECT_NEAR(r.throughput, 1.0, 0.1);
  EXPECT_NEAR(r.throughput, alloc.predicted_throughput, 0.1 * alloc.predicted_throughput);
  EXPECT_TRUE(r.conservation_holds());
  EXPECT_FALSE(r.oversubscribed);
  EXPECT_EQ(r.items_delivered, 1000);
}

TEST(Simulate, OverProvisionedBottleneckDoesNotHelp) {
  const auto g = PipelineGraph::chain({stage("A", 1, {{"cpu", 1}}), stage("B", 2, {{"cpu", 1}})});
  const std::vector<NodeSpec> nodes{{"n0", {{"cpu", 8}}}};
  const auto balanced = simulate(g, manual({1, 2}, g.stages), nodes, {500, 1});
  const auto over = simulate(g, manual({1, 4}, g.stages), nodes, {500, 1});
  EXPECT_NEAR(over.throughput, balanced.throughput, 0.05 * balanced.throughput);
}

TEST(Simulate, ZeroItems) {
  const auto g = PipelineGraph::chain({stage("A", 1, {{"cpu", 1}})});
  const auto r = simulate(g, ones(1), {{"n", {{"cpu", 1}}}}, {0, 1});
  EXPECT_EQ(r.items_delivered, 0);
  EXPECT_EQ(r.duration, 0.0);
  EXPECT_TRUE(r.conservation_holds());
}

TEST(Simulate, MemoryBoundHolds) {
  std::vector<StageSpec> stages{stage("fast", 0.01, {{"cpu", 1}}), stage("mid", 0.05, {{"cpu", 1}}),
                                stage("slow", 0.2, {{"cpu", 1}})};
  for (auto& s : stages) s.queue_capacity = 4;
  const auto g = PipelineGraph::chain(stages);
  const auto r = simulate(g, ones(3), {{"n", {{"cpu", 3}}}}, {2000, 3});
  EXPECT_TRUE(r.memory_bound_held);
  EXPECT_LE(r.peak_buffered, 12);
  for (const auto& s : r.stages) EXPECT_LE(s.peak_queue_depth, 4);
  EXPECT_EQ(r.buffer_bound, 12);
}

TEST(Simulate, ConservationUnderFailuresAndDrops) {
  std::vector<StageSpec> stages{stage("a", 0.1, {{"cpu", 1}}), stage("b", 0.1, {{"cpu", 1}}),
                                stage("cut", 0.01, {{"cpu", 1}}, StageKind::Barrier),
                                stage("c", 0.1, {{"cpu", 1}})};
  stages[0].failure_rate = 0.4;
  stages[1].drop_fraction = 0.3;
  stages[2].drop_fraction = 0.15;
  stages[3].failure_rate = 0.2;
  const auto g = PipelineGraph::chain(stages);
  const auto r = simulate(g, ones(4), {{"n", {{"cpu", 4}}}}, {1000, 9, ServiceDistribution::Exponential});
  EXPECT_TRUE(r.conservation_holds());
  EXPECT_GT(r.stages[0].retries, 0);
  EXPECT_GT(r.stages[0].failed, 0);
  EXPECT_EQ(std::int64_t(r.dead_letters.size()), r.stages[0].failed + r.stages[3].failed);
  EXPECT_EQ(r.stages[2].filtered, r.stages[2].in * 15 / 100);
  std::int64_t terminal = r.items_delivered + r.stages[1].filtered + r.stages[2].filtered;
  for (const auto& s : r.stages) terminal += s.failed;
  EXPECT_EQ(terminal, 1000);
}

TEST(Simulate, BitDeterministic) {
  std::vector<StageSpec> stages{stage("a", 0.3, {{"cpu", 1}}), stage("b", 0.7, {{"cpu", 2}})};
  stages[0].failure_rate = 0.1;
  stages[1].drop_fraction = 0.2;
  const auto g = PipelineGraph::chain(stages);
  const std::vector<NodeSpec> nodes{{"n", {{"cpu", 6}}}};
  const auto alloc = schedule(g.stages, nodes);
  const SimulationOptions opt{800, 42, ServiceDistribution::Exponential};
  EXPECT_EQ(simulate(g, alloc, nodes, opt).to_json_string(),
            simulate(g, alloc, nodes, opt).to_json_string());
  auto other = opt;
  other.seed = 43;
  EXPECT_NE(simulate(g, alloc, nodes, opt).to_json_string(),
            simulate(g, alloc, nodes, other).to_json_string());
}

TEST(Simulate, FanOutGraphConserves) {
  PipelineGraph g;
  g.stages = {stage("src", 0.1, {{"cpu", 1}}), stage("left", 0.2, {{"cpu", 1}}),
              stage("right", 0.3, {{"cpu", 1}})};
  g.edges = {{0, 1}, {0, 2}};
  g.stages[1].drop_fraction = 0.5;
  const auto r = simulate(g, ones(3), {{"n", {{"cpu", 3}}}}, {300, 5});
  EXPECT_TRUE(r.conservation_holds());
  EXPECT_EQ(r.stages[1].in, 300);
  EXPECT_EQ(r.stages[2].in, 300);
}

TEST(Live, IdentityStages) {
  const auto g = PipelineGraph::chain({stage("a", 1, {}), stage("b", 1, {})});
  std::vector<StageImpl<int>> impls(2);
  for (auto& i : impls) i.streaming = [](int&) { return true; };
  auto alloc = ones(2);
  alloc.replicas = {3, 2};
  const auto r = run_pipeline<int>(g, impls, alloc, counter(100), {});
  EXPECT_EQ(r.delivered.size(), 100u);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(r.delivered[i], i);
  EXPECT_TRUE(r.report.conservation_holds());
  EXPECT_EQ(r.report.stages[1].out, 100);
}

TEST(Live, OddFilter) {
  const auto g = PipelineGraph::chain({stage("odd", 1, {})});
  std::vector<StageImpl<int>> impls(1);
  impls[0].streaming = [](int& v) { return v % 2 == 0; };
  const auto r = run_pipeline<int>(g, impls, ones(1), counter(100), {});
  EXPECT_EQ(r.report.stages[0].out, 50);
  EXPECT_EQ(r.report.stages[0].filtered, 50);
  EXPECT_TRUE(r.report.conservation_holds());
}

TEST(Live, QueueBoundWithSlowSink) {
  std::vector<StageSpec> stages{stage("fast", 1, {}), stage("slow", 1, {})};
  for (auto& s : stages) s.queue_capacity = 4;
  const auto g = PipelineGraph::chain(stages);
  std::vector<StageImpl<int>> impls(2);
  impls[0].streaming = [](int&) { return true; };
  impls[1].streaming = [](int&) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
    return true;
  };
  const auto r = run_pipeline<int>(g, impls, ones(2), counter(200), {});
  for (const auto& s : r.report.stages) EXPECT_LE(s.peak_queue_depth, 4);
  EXPECT_LE(r.report.peak_buffered, 8);
  EXPECT_TRUE(r.report.memory_bound_held);
  EXPECT_EQ(r.delivered.size(), 200u);
}

TEST(Live, RetriesThenDeadLetters) {
  const auto g = PipelineGraph::chain({stage("flaky", 1, {})});
  std::vector<StageImpl<int>> impls(1);
  auto attempts = std::make_shared<std::map<int, int>>();
  auto mu = std::make_shared<std::mutex>();
  impls[0].streaming = [attempts, mu](int& v) {
    int n;
    {
      std::lock_guard lock(*mu);
      n = ++(*attempts)[v];
    }
    if (v % 10 == 0) throw std::runtime_error("always");
    if (n == 1) throw std::runtime_error("first try");
    v *= 2;
    return true;
  };
  LiveOptions<int> opt;
  opt.label = [](const int& v) { return "item" + std::to_string(v); };
  const auto r = run_pipeline<int>(g, impls, ones(1), counter(50), opt);
  EXPECT_EQ(r.delivered.size(), 45u);
  EXPECT_EQ(r.delivered[0], 2);
  EXPECT_EQ(r.report.dead_letters.size(), 5u);
  EXPECT_EQ(r.report.dead_letters[0].error, "always");
  EXPECT_EQ(r.report.stages[0].retries, 45 + 5 * 2);
  EXPECT_TRUE(r.report.conservation_holds());
}

TEST(Live, BarrierSeesEverything) {
  const auto g = PipelineGraph::chain(
      {stage("pre", 1, {}), stage("cut", 1, {}, StageKind::Barrier), stage("post", 1, {})});
  std::vector<StageImpl<int>> impls(3);
  impls[0].streaming = [](int&) { return true; };
  impls[2].streaming = [](int&) { return true; };
  impls[1].barrier = [](std::vector<int>& all) {
    EXPECT_EQ(all.size(), 40u);
    std::vector<bool> keep;
    for (int v : all) keep.push_back(v >= 10);
    return keep;
  };
  auto alloc = ones(3);
  alloc.replicas[0] = 4;
  const auto r = run_pipeline<int>(g, impls, alloc, counter(40), {});
  EXPECT_EQ(r.delivered.size(), 30u);
  EXPECT_EQ(r.report.stages[1].filtered, 10);
  EXPECT_TRUE(r.report.conservation_holds());
}

TEST(Live, PanicDrainsAndReports) {
  const auto g = PipelineGraph::chain({stage("a", 1, {}), stage("b", 1, {})});
  std::vector<StageImpl<int>> impls(2);
  impls[0].streaming = [](int& v) {
    if (v == 20) throw StagePanic("disk gone");
    return true;
  };
  impls[1].streaming = [](int&) { return true; };
  const auto r = run_pipeline<int>(g, impls, ones(2), counter(100000), {});
  EXPECT_TRUE(r.report.aborted);
  EXPECT_NE(r.report.abort_reason.find("disk gone"), std::string::npos);
  EXPECT_LT(r.report.items_in, 100000);
  EXPECT_TRUE(r.report.conservation_holds());
  EXPECT_EQ(r.report.dead_letters.size(), 1u);
}
