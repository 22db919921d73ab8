#include "curator/orchestrator/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

#include "curator/common/hash.hpp"

namespace curator::orchestrator {

namespace {

struct Item {
  std::int64_t id = 0;
  int attempts = 0;
};

enum class ReplicaState { Idle, Busy, Blocked };

struct Replica {
  int node = 0;
  ReplicaState state = ReplicaState::Idle;
  Item item;
  double started = 0.0;
};

struct StageRt {
  std::deque<Item> queue;
  std::vector<Replica> replicas;
  std::vector<Item> held;  // barrier: processed items waiting for upstream to finish
  bool releasing = false;
  std::vector<Item> release;  // barrier: survivors still to push downstream
  std::size_t release_pos = 0;
  bool done = false;
};

struct Event {
  double time;
  std::uint64_t seq;
  int stage;
  int replica;
  bool operator>(const Event& o) const {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};

// Order-independent per-(stage, item, attempt, purpose) uniform in [0, 1).
double draw(std::uint64_t seed, int stage, std::int64_t item, int attempt, int purpose) {
  std::uint64_t s = seed ^ (static_cast<std::uint64_t>(stage) * 0x9E3779B97F4A7C15ULL);
  s ^= static_cast<std::uint64_t>(item) * 0xC2B2AE3D27D4EB4FULL;
  s ^= static_cast<std::uint64_t>(attempt) << 48;
  s ^= static_cast<std::uint64_t>(purpose) << 56;
  const std::uint64_t r = splitmix64(s);
  return static_cast<double>(r >> 11) * 0x1.0p-53;
}

class Sim {
 public:
  Sim(const PipelineGraph& g, const Allocation& a, const std::vector<NodeSpec>& nodes,
      const SimulationOptions& o)
      : g_(g), nodes_(nodes), o_(o), succ_(g.successors()), pred_(g.predecessors()) {
    const std::size_t S = g.stages.size();
    rt_.resize(S);
    report_.mode = "simulated";
    report_.items_in = 0;
    report_.edges = g.edges;
    report_.stages.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
      auto& st = report_.stages[s];
      st.name = g.stages[s].name;
      st.replicas = a.replicas[s];
      st.queue_capacity = g.stages[s].queue_capacity;
      report_.buffer_bound += g.stages[s].queue_capacity;
      for (std::size_t n = 0; n < a.placement.size(); ++n) {
        for (int r = 0; r < a.placement[n][s]; ++r) rt_[s].replicas.push_back(Replica{static_cast<int>(n), ReplicaState::Idle, Item{}, 0.0});
      }
      // Allocation without a placement table: put everything on node 0.
      while (static_cast<int>(rt_[s].replicas.size()) < a.replicas[s]) rt_[s].replicas.push_back(Replica{0, ReplicaState::Idle, Item{}, 0.0});
      if (pred_[s].empty()) roots_.push_back(static_cast<int>(s));
    }
    node_busy_.assign(std::max<std::size_t>(nodes.size(), 1), ResourceVector{});
  }

  RunReport run() {
    const std::size_t S = g_.stages.size();
    feed_source();
    progress();
    while (!events_.empty()) {
      const Event e = events_.top();
      events_.pop();
      now_ = e.time;
      complete(e.stage, e.replica);
      progress();
    }
    report_.duration = now_;
    for (std::size_t s = 0; s < S; ++s) {
      auto& st = report_.stages[s];
      const double cap = st.replicas * report_.duration;
      st.utilization = cap > 0.0 ? st.busy_time / cap : 0.0;
    }
    report_.throughput = steady_throughput();
    return report_;
  }

 private:
  double service_time(int s, const Item& it) const {
    const double mean = g_.stages[s].service_time;
    if (o_.distribution == ServiceDistribution::Deterministic) return mean;
    const double u = draw(o_.seed, s, it.id, it.attempts, 0);
    return -mean * std::log1p(-u);
  }

  bool queue_has_room(int s) const {
    return static_cast<int>(rt_[s].queue.size()) < g_.stages[s].queue_capacity;
  }

  bool can_emit(int s) const {
    return std::all_of(succ_[s].begin(), succ_[s].end(), [&](int t) { return queue_has_room(t); });
  }

  void enqueue(int s, const Item& it) {
    rt_[s].queue.push_back(Item{it.id, 0});
    ++buffered_;
    auto& st = report_.stages[s];
    ++st.in;
    st.peak_queue_depth = std::max<std::int64_t>(st.peak_queue_depth, rt_[s].queue.size());
    observe();
  }

  // Hand an item to every successor, or deliver it if s is a sink.
  void emit(int s, const Item& it) {
    ++report_.stages[s].out;
    if (succ_[s].empty()) {
      ++report_.items_delivered;
      deliveries_.push_back(now_);
      return;
    }
    for (int t : succ_[s]) enqueue(t, it);
  }

  void feed_source() {
    while (next_item_ < o_.item_count) {
      const bool room = std::all_of(roots_.begin(), roots_.end(), [&](int r) { return queue_has_room(r); });
      if (!room) return;
      const Item it{next_item_++, 0};
      ++report_.items_in;
      for (int r : roots_) enqueue(r, it);
    }
  }

  void start(int s, int r, const Item& it) {
    auto& rep = rt_[s].replicas[r];
    rep.state = ReplicaState::Busy;
    rep.item = it;
    rep.started = now_;
    node_busy_[rep.node] += g_.stages[s].demand;
    if (rep.node < static_cast<int>(nodes_.size()) && !node_busy_[rep.node].fits_within(nodes_[rep.node].capacity)) {
      report_.oversubscribed = true;
    }
    events_.push({now_ + service_time(s, it), seq_++, s, r});
  }

  void finish_busy(int s, int r) {
    auto& rep = rt_[s].replicas[r];
    report_.stages[s].busy_time += now_ - rep.started;
    node_busy_[rep.node] -= g_.stages[s].demand;
  }

  void complete(int s, int r) {
    auto& rep = rt_[s].replicas[r];
    const auto& spec = g_.stages[s];
    auto& st = report_.stages[s];
    Item it = rep.item;
    const bool failed_attempt =
        spec.failure_rate > 0.0 && draw(o_.seed, s, it.id, it.attempts, 1) < spec.failure_rate;
    if (failed_attempt) {
      ++it.attempts;
      if (it.attempts > o_.retry_budget) {
        finish_busy(s, r);
        ++st.failed;
        report_.dead_letters.push_back({spec.name, it.id, "", "retry budget exhausted"});
        rep.state = ReplicaState::Idle;
        return;
      }
      ++st.retries;
      report_.stages[s].busy_time += now_ - rep.started;
      rep.started = now_;
      rep.item = it;
      events_.push({now_ + service_time(s, it), seq_++, s, r});
      return;
    }
    finish_busy(s, r);
    if (spec.kind == StageKind::Barrier) {
      rt_[s].held.push_back(it);
      rep.state = ReplicaState::Idle;
      return;
    }
    if (spec.drop_fraction > 0.0 && draw(o_.seed, s, it.id, 0, 2) < spec.drop_fraction) {
      ++st.filtered;
      rep.state = ReplicaState::Idle;
      return;
    }
    rep.item = it;
    rep.state = ReplicaState::Blocked;  // resolved by progress() if there is room
  }

  bool upstream_done(int s) const {
    if (pred_[s].empty()) return next_item_ >= o_.item_count;
    return std::all_of(pred_[s].begin(), pred_[s].end(), [&](int p) { return rt_[p].done; });
  }

  bool replicas_idle(int s) const {
    return std::all_of(rt_[s].replicas.begin(), rt_[s].replicas.end(),
                       [](const Replica& r) { return r.state == ReplicaState::Idle; });
  }

  void open_barrier(int s) {
    auto& rt = rt_[s];
    auto& held = rt.held;
    // Drop exactly floor(f * N); victims are the items with the lowest draws.
    const auto n = static_cast<std::int64_t>(held.size());
    const auto drop = static_cast<std::int64_t>(std::floor(g_.stages[s].drop_fraction * n + 1e-9));
    std::vector<std::pair<double, std::int64_t>> keyed;
    for (std::int64_t i = 0; i < n; ++i) keyed.emplace_back(draw(o_.seed, s, held[i].id, 0, 3), i);
    std::sort(keyed.begin(), keyed.end());
    std::vector<bool> dropped(held.size(), false);
    for (std::int64_t i = 0; i < drop; ++i) dropped[keyed[i].second] = true;
    std::vector<Item> keep;
    for (std::int64_t i = 0; i < n; ++i) {
      if (dropped[i]) {
        ++report_.stages[s].filtered;
      } else {
        keep.push_back(held[i]);
      }
    }
    std::sort(keep.begin(), keep.end(), [](const Item& a, const Item& b) { return a.id < b.id; });
    rt.release = std::move(keep);
    rt.release_pos = 0;
    held.clear();
    rt.releasing = true;
  }

  // Repeat until nothing changes: unblock emitters, start idle replicas, feed the source.
  void progress() {
    const auto order = g_.topological_order();
    bool changed = true;
    while (changed) {
      changed = false;
      // Downstream first so that freed queue slots propagate upstream in one pass.
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const int s = *it;
        auto& rt = rt_[s];
        for (std::size_t r = 0; r < rt.replicas.size(); ++r) {
          auto& rep = rt.replicas[r];
          if (rep.state == ReplicaState::Blocked && can_emit(s)) {
            emit(s, rep.item);
            rep.state = ReplicaState::Idle;
            changed = true;
          }
        }
        while (rt.releasing && rt.release_pos < rt.release.size() && can_emit(s)) {
          emit(s, rt.release[rt.release_pos++]);
          changed = true;
        }
        for (std::size_t r = 0; r < rt.replicas.size() && !rt.queue.empty(); ++r) {
          if (rt.replicas[r].state != ReplicaState::Idle) continue;
          const Item item = rt.queue.front();
          rt.queue.pop_front();
          --buffered_;
          start(s, static_cast<int>(r), item);
          changed = true;
        }
        if (!rt.done && upstream_done(s) && rt.queue.empty() && replicas_idle(s)) {
          if (g_.stages[s].kind == StageKind::Barrier && !rt.releasing) {
            open_barrier(s);
            changed = true;
          }
          if (g_.stages[s].kind != StageKind::Barrier || rt.release_pos == rt.release.size()) {
            rt.done = true;
            changed = true;
          }
        }
      }
      const auto before = next_item_;
      feed_source();
      if (next_item_ != before) changed = true;
    }
    observe();
  }

  void observe() {
    report_.peak_buffered = std::max(report_.peak_buffered, buffered_);
    if (buffered_ > report_.buffer_bound) report_.memory_bound_held = false;
  }

  double steady_throughput() const {
    const auto n = static_cast<std::int64_t>(deliveries_.size());
    if (n == 0) return 0.0;
    auto skip = static_cast<std::int64_t>(std::floor(o_.warmup_fraction * n));
    if (n - skip < 2) return report_.duration > 0.0 ? n / report_.duration : 0.0;
    const double span = deliveries_.back() - deliveries_[skip];
    if (span <= 0.0) return report_.duration > 0.0 ? n / report_.duration : 0.0;
    return static_cast<double>(n - 1 - skip) / span;
  }

  const PipelineGraph& g_;
  const std::vector<NodeSpec>& nodes_;
  const SimulationOptions& o_;
  std::vector<std::vector<int>> succ_, pred_;
  std::vector<int> roots_;
  std::vector<StageRt> rt_;
  std::vector<ResourceVector> node_busy_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  std::int64_t next_item_ = 0;
  std::int64_t buffered_ = 0;
  std::vector<double> deliveries_;
  RunReport report_;
};

}  // namespace

RunReport simulate(const PipelineGraph& graph, const Allocation& allocation,
                   const std::vector<NodeSpec>& nodes, const SimulationOptions& options) {
  graph.validate();
  if (allocation.replicas.size() != graph.stages.size()) {
    throw std::invalid_argument("simulate: allocation does not match the graph");
  }
  for (int r : allocation.replicas) {
    if (r < 1) throw std::invalid_argument("simulate: every stage needs a replica");
  }
  if (options.item_count < 0) throw std::invalid_argument("simulate: negative item count");
  Sim sim(graph, allocation, nodes, options);
  return sim.run();
}

}  // namespace curator::orchestrator
