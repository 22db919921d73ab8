#include "curator/orchestrator/run_report.hpp"

namespace curator::orchestrator {

bool RunReport::conservation_holds() const {
  const std::size_t S = stages.size();
  std::vector<std::int64_t> upstream(S, 0);
  std::vector<bool> has_pred(S, false), has_succ(S, false);
  for (const auto& [a, b] : edges) {
    upstream[b] += stages[a].out;
    has_pred[b] = true;
    has_succ[a] = true;
  }
  std::int64_t sink_out = 0;
  for (std::size_t s = 0; s < S; ++s) {
    const auto& st = stages[s];
    if (st.in != st.out + st.filtered + st.failed) return false;
    if (st.in != (has_pred[s] ? upstream[s] : items_in)) return false;
    if (!has_succ[s]) sink_out += st.out;
  }
  return S == 0 || sink_out == items_delivered;
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["mode"] = mode;
  j["items_in"] = items_in;
  j["items_delivered"] = items_delivered;
  j["duration"] = duration;
  j["throughput"] = throughput;
  j["peak_buffered"] = peak_buffered;
  j["buffer_bound"] = buffer_bound;
  j["memory_bound_held"] = memory_bound_held;
  j["oversubscribed"] = oversubscribed;
  j["aborted"] = aborted;
  if (aborted) j["abort_reason"] = abort_reason;
  j["conservation"] = conservation_holds();
  auto& sj = j["stages"] = nlohmann::json::array();
  for (const auto& s : stages) {
    sj.push_back({{"name", s.name},
                  {"replicas", s.replicas},
                  {"in", s.in},
                  {"out", s.out},
                  {"filtered", s.filtered},
                  {"failed", s.failed},
                  {"retries", s.retries},
                  {"peak_queue_depth", s.peak_queue_depth},
                  {"queue_capacity", s.queue_capacity},
                  {"busy_time", s.busy_time},
                  {"utilization", s.utilization}});
  }
  auto& dl = j["dead_letters"] = nlohmann::json::array();
  for (const auto& d : dead_letters) {
    dl.push_back({{"stage", d.stage}, {"item", d.item}, {"label", d.label}, {"error", d.error}});
  }
  return j;
}

}  // namespace curator::orchestrator
