#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "curator/orchestrator/resources.hpp"
#include "curator/orchestrator/run_report.hpp"

namespace curator::orchestrator {

/// Thrown by a stage to abort the whole run. The source stops, items already
/// in flight drain, and the report is marked aborted.
class StagePanic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T>
struct StageImpl {
  // Streaming: return true to pass the item on, false to filter it out.
  // Any other exception counts as a failed attempt and is retried.
  std::function<bool(T&)> streaming;
  // Barrier: sees every upstream item (ordered by arrival sequence number)
  // and returns a keep mask of the same length.
  std::function<std::vector<bool>(std::vector<T>&)> barrier;
};

template <class T>
struct LiveOptions {
  int retry_budget = 2;
  std::function<std::string(const T&)> label;  // names items in dead letters
};

template <class T>
struct LiveResult {
  RunReport report;
  std::vector<T> delivered;  // sink outputs ordered by source sequence
};

template <class T>
class BoundedQueue {
 public:
  BoundedQueue(std::size_t capacity, std::atomic<std::int64_t>& buffered,
               std::atomic<std::int64_t>& peak_buffered)
      : capacity_(capacity), buffered_(buffered), peak_buffered_(peak_buffered) {}

  void push(T value) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_; });
    items_.push_back(std::move(value));
    peak_depth_ = std::max(peak_depth_, items_.size());
    const auto now = buffered_.fetch_add(1) + 1;
    auto peak = peak_buffered_.load();
    while (now > peak && !peak_buffered_.compare_exchange_weak(peak, now)) {
    }
    not_empty_.notify_one();
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || producers_ == 0; });
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    buffered_.fetch_sub(1);
    not_full_.notify_one();
    return v;
  }

  void add_producer() {
    std::lock_guard lock(mu_);
    ++producers_;
  }

  void producer_done() {
    std::lock_guard lock(mu_);
    if (--producers_ == 0) not_empty_.notify_all();
  }

  std::size_t peak_depth() const {
    std::lock_guard lock(mu_);
    return peak_depth_;
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable not_full_, not_empty_;
  std::deque<T> items_;
  std::size_t capacity_;
  std::size_t peak_depth_ = 0;
  int producers_ = 0;
  std::atomic<std::int64_t>& buffered_;
  std::atomic<std::int64_t>& peak_buffered_;
};

namespace detail {

template <class T>
struct Envelope {
  std::int64_t seq = 0;
  T value;
};

struct StageCounters {
  std::atomic<std::int64_t> in{0}, out{0}, filtered{0}, failed{0}, retries{0};
  std::atomic<std::int64_t> busy_ns{0};
  std::atomic<int> live_workers{0};
};

}  // namespace detail

/// Runs `graph` on real threads: one thread per replica for streaming
/// stages, one collector thread per barrier stage, and a source thread that
/// pulls from `source` until it returns nullopt.
template <class T>
LiveResult<T> run_pipeline(const PipelineGraph& graph, const std::vector<StageImpl<T>>& impls,
                           const Allocation& allocation, std::function<std::optional<T>()> source,
                           const LiveOptions<T>& options = {}) {
  using Env = detail::Envelope<T>;
  graph.validate();
  const std::size_t S = graph.stages.size();
  if (impls.size() != S || allocation.replicas.size() != S) {
    throw std::invalid_argument("run_pipeline: stage implementations do not match the graph");
  }
  for (std::size_t s = 0; s < S; ++s) {
    const bool barrier = graph.stages[s].kind == StageKind::Barrier;
    if (barrier ? !impls[s].barrier : !impls[s].streaming) {
      throw std::invalid_argument("run_pipeline: stage " + graph.stages[s].name +
                                  " lacks an implementation of its kind");
    }
    if (allocation.replicas[s] < 1) throw std::invalid_argument("run_pipeline: replicas < 1");
  }

  const auto succ = graph.successors();
  const auto pred = graph.predecessors();
  std::atomic<std::int64_t> buffered{0}, peak_buffered{0};
  std::vector<std::unique_ptr<BoundedQueue<Env>>> queues;
  std::vector<detail::StageCounters> counters(S);
  std::vector<int> roots;
  for (std::size_t s = 0; s < S; ++s) {
    queues.push_back(std::make_unique<BoundedQueue<Env>>(graph.stages[s].queue_capacity, buffered,
                                                         peak_buffered));
    if (pred[s].empty()) {
      roots.push_back(static_cast<int>(s));
      queues[s]->add_producer();
    } else {
      for (std::size_t p = 0; p < pred[s].size(); ++p) queues[s]->add_producer();
    }
  }

  std::mutex report_mu;
  std::vector<DeadLetter> dead;
  std::vector<std::pair<std::int64_t, T>> delivered;
  std::atomic<bool> abort{false};
  std::string abort_reason;
  std::atomic<std::int64_t> items_in{0};

  auto label_of = [&](const T& v) { return options.label ? options.label(v) : std::string(); };
  auto panic = [&](const std::string& why) {
    std::lock_guard lock(report_mu);
    if (!abort.exchange(true)) abort_reason = why;
  };
  auto emit = [&](std::size_t s, Env env) {
    counters[s].out.fetch_add(1);
    if (succ[s].empty()) {
      std::lock_guard lock(report_mu);
      delivered.emplace_back(env.seq, std::move(env.value));
      return;
    }
    for (std::size_t i = 0; i < succ[s].size(); ++i) {
      const int t = succ[s][i];
      counters[t].in.fetch_add(1);
      if (i + 1 == succ[s].size()) {
        queues[t]->push(std::move(env));
      } else {
        queues[t]->push(env);
      }
    }
  };
  auto dead_letter = [&](std::size_t s, const Env& env, const std::string& why) {
    counters[s].failed.fetch_add(1);
    std::lock_guard lock(report_mu);
    dead.push_back({graph.stages[s].name, env.seq, label_of(env.value), why});
  };
  auto stage_finished = [&](std::size_t s) {
    for (int t : succ[s]) queues[t]->producer_done();
  };
  auto timed = [&](std::size_t s, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    counters[s].busy_ns.fetch_add(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count());
  };

  auto streaming_worker = [&](std::size_t s) {
    while (auto env = queues[s]->pop()) {
      for (int attempt = 0;; ++attempt) {
        bool keep = false;
        std::string error;
        bool panicked = false;
        T work = env->value;  // a failed attempt must not leak partial edits
        timed(s, [&] {
          try {
            keep = impls[s].streaming(work);
          } catch (const StagePanic& e) {
            panicked = true;
            error = e.what();
          } catch (const std::exception& e) {
            error = e.what();
            if (error.empty()) error = "stage error";
          }
        });
        if (panicked) {
          dead_letter(s, *env, error);
          panic(graph.stages[s].name + ": " + error);
          break;
        }
        if (error.empty()) {
          if (keep) {
            emit(s, Env{env->seq, std::move(work)});
          } else {
            counters[s].filtered.fetch_add(1);
          }
          break;
        }
        if (attempt >= options.retry_budget) {
          dead_letter(s, *env, error);
          break;
        }
        counters[s].retries.fetch_add(1);
      }
    }
    if (counters[s].live_workers.fetch_sub(1) == 1) stage_finished(s);
  };

  auto barrier_worker = [&](std::size_t s) {
    std::vector<Env> held;
    while (auto env = queues[s]->pop()) held.push_back(std::move(*env));
    std::sort(held.begin(), held.end(), [](const Env& a, const Env& b) { return a.seq < b.seq; });
    std::vector<bool> mask;
    std::string error;
    bool ok = false;
    for (int attempt = 0; attempt <= options.retry_budget && !ok; ++attempt) {
      std::vector<T> values;
      values.reserve(held.size());
      for (const auto& e : held) values.push_back(e.value);
      timed(s, [&] {
        try {
          mask = impls[s].barrier(values);
          if (mask.size() != values.size()) throw std::runtime_error("barrier keep mask has wrong length");
          ok = true;
          for (std::size_t i = 0; i < held.size(); ++i) held[i].value = std::move(values[i]);
        } catch (const StagePanic& e) {
          error = e.what();
          attempt = options.retry_budget;
          panic(graph.stages[s].name + ": " + error);
        } catch (const std::exception& e) {
          error = e.what();
        }
      });
      if (!ok && attempt < options.retry_budget) counters[s].retries.fetch_add(1);
    }
    for (std::size_t i = 0; i < held.size(); ++i) {
      if (!ok) {
        dead_letter(s, held[i], error);
      } else if (mask[i]) {
        emit(s, std::move(held[i]));
      } else {
        counters[s].filtered.fetch_add(1);
      }
    }
    stage_finished(s);
  };

  const auto t0 = std::chrono::steady_clock::now();
  {
    std::vector<std::jthread> threads;
    for (std::size_t s = 0; s < S; ++s) {
      if (graph.stages[s].kind == StageKind::Barrier) {
        threads.emplace_back(barrier_worker, s);
      } else {
        counters[s].live_workers = allocation.replicas[s];
        for (int r = 0; r < allocation.replicas[s]; ++r) threads.emplace_back(streaming_worker, s);
      }
    }
    std::int64_t seq = 0;
    while (!abort.load()) {
      std::optional<T> next;
      try {
        next = source();
      } catch (const std::exception& e) {
        panic(std::string("source: ") + e.what());
        break;
      }
      if (!next) break;
      items_in.fetch_add(1);
      Env env{seq++, std::move(*next)};
      for (std::size_t i = 0; i < roots.size(); ++i) {
        counters[roots[i]].in.fetch_add(1);
        if (i + 1 == roots.size()) {
          queues[roots[i]]->push(std::move(env));
        } else {
          queues[roots[i]]->push(env);
        }
      }
    }
    for (int r : roots) queues[r]->producer_done();
  }
  const double duration = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  LiveResult<T> result;
  auto& rep = result.report;
  rep.mode = "live";
  rep.edges = graph.edges;
  rep.items_in = items_in.load();
  rep.duration = duration;
  rep.peak_buffered = peak_buffered.load();
  for (std::size_t s = 0; s < S; ++s) {
    StageReport st;
    st.name = graph.stages[s].name;
    st.replicas = allocation.replicas[s];
    st.in = counters[s].in;
    st.out = counters[s].out;
    st.filtered = counters[s].filtered;
    st.failed = counters[s].failed;
    st.retries = counters[s].retries;
    st.peak_queue_depth = static_cast<std::int64_t>(queues[s]->peak_depth());
    st.queue_capacity = graph.stages[s].queue_capacity;
    st.busy_time = static_cast<double>(counters[s].busy_ns.load()) * 1e-9;
    const int workers = graph.stages[s].kind == StageKind::Barrier ? 1 : st.replicas;
    st.utilization = duration > 0.0 ? st.busy_time / (workers * duration) : 0.0;
    rep.buffer_bound += st.queue_capacity;
    rep.stages.push_back(std::move(st));
  }
  rep.memory_bound_held = rep.peak_buffered <= rep.buffer_bound;
  std::sort(delivered.begin(), delivered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  rep.items_delivered = static_cast<std::int64_t>(delivered.size());
  rep.throughput = duration > 0.0 ? rep.items_delivered / duration : 0.0;
  std::sort(dead.begin(), dead.end(), [](const DeadLetter& a, const DeadLetter& b) {
    return a.item != b.item ? a.item < b.item : a.stage < b.stage;
  });
  rep.dead_letters = std::move(dead);
  rep.aborted = abort.load();
  rep.abort_reason = abort_reason;
  for (auto& [_, v] : delivered) result.delivered.push_back(std::move(v));
  return result;
}

}  // namespace curator::orchestrator
