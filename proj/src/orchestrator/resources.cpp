#include "curator/orchestrator/resources.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace curator::orchestrator {

ResourceVector::ResourceVector(std::initializer_list<std::pair<const std::string, double>> init) {
  for (const auto& [k, v] : init) set(k, v);
}

double ResourceVector::get(const std::string& kind) const {
  const auto it = amounts_.find(kind);
  return it == amounts_.end() ? 0.0 : it->second;
}

void ResourceVector::set(const std::string& kind, double amount) {
  if (!(amount >= 0.0) || !std::isfinite(amount)) {
    throw std::invalid_argument("resource '" + kind + "' must be a finite non-negative amount");
  }
  amounts_[kind] = amount;
}

bool ResourceVector::fits_within(const ResourceVector& capacity, double slack) const {
  return std::all_of(amounts_.begin(), amounts_.end(), [&](const auto& kv) {
    return kv.second <= capacity.get(kv.first) + slack;
  });
}

double ResourceVector::l1() const {
  double s = 0.0;
  for (const auto& [_, v] : amounts_) s += v;
  return s;
}

ResourceVector& ResourceVector::operator+=(const ResourceVector& other) {
  for (const auto& [k, v] : other.amounts_) amounts_[k] += v;
  return *this;
}

ResourceVector& ResourceVector::operator-=(const ResourceVector& other) {
  // Remaining capacity may dip below zero only by rounding; clamp it.
  for (const auto& [k, v] : other.amounts_) amounts_[k] = std::max(0.0, amounts_[k] - v);
  return *this;
}

ResourceVector operator*(const ResourceVector& v, double k) {
  ResourceVector out;
  for (const auto& [kind, amount] : v.amounts_) out.amounts_[kind] = amount * k;
  return out;
}

ResourceVector ResourceVector::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("resource vector must be a JSON object");
  ResourceVector r;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw std::invalid_argument("resource '" + k + "' must be numeric");
    r.set(k, v.get<double>());
  }
  return r;
}

void StageSpec::validate() const {
  if (name.empty()) throw std::invalid_argument("stage needs a name");
  if (!(service_time > 0.0) || !std::isfinite(service_time)) {
    throw std::invalid_argument("stage " + name + ": service_time must be > 0");
  }
  if (queue_capacity < 1) throw std::invalid_argument("stage " + name + ": queue_capacity < 1");
  if (drop_fraction < 0.0 || drop_fraction > 1.0 || failure_rate < 0.0 || failure_rate >= 1.0) {
    throw std::invalid_argument("stage " + name + ": rates out of range");
  }
}

void PipelineGraph::validate() const {
  if (stages.empty()) throw std::invalid_argument("pipeline has no stages");
  for (const auto& s : stages) s.validate();
  for (std::size_t i = 0; i < stages.size(); ++i) {
    for (std::size_t j = i + 1; j < stages.size(); ++j) {
      if (stages[i].name == stages[j].name) {
        throw std::invalid_argument("duplicate stage name " + stages[i].name);
      }
    }
  }
  const int n = static_cast<int>(stages.size());
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n || a == b) {
      throw std::invalid_argument("pipeline edge out of range or self-loop");
    }
  }
  topological_order();
}

std::vector<std::vector<int>> PipelineGraph::successors() const {
  std::vector<std::vector<int>> out(stages.size());
  for (const auto& [a, b] : edges) out[a].push_back(b);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

std::vector<std::vector<int>> PipelineGraph::predecessors() const {
  std::vector<std::vector<int>> out(stages.size());
  for (const auto& [a, b] : edges) out[b].push_back(a);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

std::vector<int> PipelineGraph::topological_order() const {
  const auto succ = successors();
  std::vector<int> indegree(stages.size(), 0);
  for (const auto& [a, b] : edges) ++indegree[b];
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (indegree[i] == 0) ready.push(static_cast<int>(i));
  }
  std::vector<int> order;
  while (!ready.empty()) {
    const int s = ready.top();
    ready.pop();
    order.push_back(s);
    for (int t : succ[s]) {
      if (--indegree[t] == 0) ready.push(t);
    }
  }
  if (order.size() != stages.size()) throw std::invalid_argument("pipeline graph has a cycle");
  return order;
}

int PipelineGraph::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].name == name) return static_cast<int>(i);
  }
  throw std::invalid_argument("unknown stage " + name);
}

PipelineGraph PipelineGraph::from_json(const nlohmann::json& j) {
  PipelineGraph g;
  try {
    for (const auto& sj : j.at("stages")) {
      StageSpec s;
      s.name = sj.at("name").get<std::string>();
      const std::string kind = sj.value("kind", "streaming");
      if (kind == "streaming") {
        s.kind = StageKind::Streaming;
      } else if (kind == "barrier") {
        s.kind = StageKind::Barrier;
      } else {
        throw std::invalid_argument("stage " + s.name + ": kind must be streaming or barrier");
      }
      if (sj.contains("demand")) s.demand = ResourceVector::from_json(sj["demand"]);
      s.service_time = sj.value("service_time_hint", sj.value("service_time", 1.0));
      s.queue_capacity = sj.value("queue_capacity", 8);
      s.drop_fraction = sj.value("drop_fraction", 0.0);
      s.failure_rate = sj.value("failure_rate", 0.0);
      g.stages.push_back(std::move(s));
    }
    if (j.contains("edges")) {
      auto endpoint = [&](const nlohmann::json& e) {
        return e.is_string() ? g.index_of(e.get<std::string>()) : e.get<int>();
      };
      for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2) throw std::invalid_argument("edge must be [from, to]");
        g.edges.emplace_back(endpoint(e[0]), endpoint(e[1]));
      }
    } else {
      for (std::size_t i = 0; i + 1 < g.stages.size(); ++i) {
        g.edges.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("pipeline definition: ") + e.what());
  }
  g.validate();
  return g;
}

nlohmann::json PipelineGraph::to_json() const {
  nlohmann::json j;
  auto& arr = j["stages"] = nlohmann::json::array();
  for (const auto& s : stages) {
    arr.push_back({{"name", s.name},
                   {"kind", s.kind == StageKind::Barrier ? "barrier" : "streaming"},
                   {"demand", s.demand.to_json()},
                   {"service_time_hint", s.service_time},
                   {"queue_capacity", s.queue_capacity}});
  }
  auto& ej = j["edges"] = nlohmann::json::array();
  for (const auto& [a, b] : edges) ej.push_back({stages[a].name, stages[b].name});
  return j;
}

PipelineGraph PipelineGraph::chain(std::vector<StageSpec> stages) {
  PipelineGraph g;
  g.stages = std::move(stages);
  for (std::size_t i = 0; i + 1 < g.stages.size(); ++i) {
    g.edges.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
  }
  g.validate();
  return g;
}

double predicted_throughput(const std::vector<StageSpec>& stages, const std::vector<int>& replicas) {
  double t = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < stages.size(); ++i) {
    t = std::min(t, replicas[i] / stages[i].service_time);
  }
  return stages.empty() ? 0.0 : t;
}

bool Allocation::valid_for(const std::vector<StageSpec>& stages,
                           const std::vector<NodeSpec>& nodes) const {
  if (replicas.size() != stages.size() || placement.size() != nodes.size()) return false;
  std::vector<int> placed(stages.size(), 0);
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (placement[n].size() != stages.size()) return false;
    ResourceVector used;
    for (std::size_t s = 0; s < stages.size(); ++s) {
      if (placement[n][s] < 0) return false;
      used += stages[s].demand * placement[n][s];
      placed[s] += placement[n][s];
    }
    if (!used.fits_within(nodes[n].capacity)) return false;
  }
  for (std::size_t s = 0; s < stages.size(); ++s) {
    if (replicas[s] < 1 || placed[s] != replicas[s]) return false;
  }
  return true;
}

nlohmann::json Allocation::to_json(const std::vector<StageSpec>& stages,
                                   const std::vector<NodeSpec>& nodes) const {
  nlohmann::json j;
  j["predicted_throughput"] = predicted_throughput;
  auto& rs = j["replicas"] = nlohmann::json::object();
  for (std::size_t s = 0; s < stages.size(); ++s) rs[stages[s].name] = replicas[s];
  auto& pl = j["placement"] = nlohmann::json::object();
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    auto& node = pl[nodes[n].node_id] = nlohmann::json::object();
    for (std::size_t s = 0; s < stages.size(); ++s) {
      if (placement[n][s] > 0) node[stages[s].name] = placement[n][s];
    }
  }
  return j;
}

}  // namespace curator::orchestrator
