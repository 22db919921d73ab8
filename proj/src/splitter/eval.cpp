#include "curator/splitter/eval.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace curator::splitter {

std::int64_t range_to_midpoint(std::int64_t start, std::int64_t end) {
  if (start > end) throw std::invalid_argument("range_to_midpoint: start > end");
  const std::int64_t sum = start + end;
  return sum >= 0 ? sum / 2 : -((-sum + 1) / 2);
}

SplitEvalResult eval_split(std::span<const std::int64_t> pred_in,
                           std::span<const std::int64_t> gt_in, std::int64_t tolerance) {
  if (tolerance < 0) throw std::invalid_argument("eval_split: negative tolerance");
  std::vector<std::int64_t> pred(pred_in.begin(), pred_in.end());
  std::vector<std::int64_t> gt(gt_in.begin(), gt_in.end());
  std::sort(pred.begin(), pred.end());
  std::sort(gt.begin(), gt.end());

  SplitEvalResult r;
  std::size_t j = 0;
  for (std::int64_t g : gt) {
    while (j < pred.size() && pred[j] < g - tolerance) ++j;
    if (j < pred.size() && pred[j] <= g + tolerance) {
      ++r.tp;
      ++j;
    }
  }
  r.fp = static_cast<std::int64_t>(pred.size()) - r.tp;
  r.fn = static_cast<std::int64_t>(gt.size()) - r.tp;

  if (pred.empty() && gt.empty()) {
    r.precision = r.recall = r.f1 = 1.0;
    return r;
  }
  r.precision = pred.empty() ? 0.0 : static_cast<double>(r.tp) / pred.size();
  r.recall = gt.empty() ? 0.0 : static_cast<double>(r.tp) / gt.size();
  const double pr = r.precision + r.recall;
  r.f1 = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
  return r;
}

std::vector<std::int64_t> load_boundary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open boundary file " + path);
  std::vector<std::int64_t> frames;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": not JSON");
    }
    if (j.contains("frame")) {
      frames.push_back(j.at("frame").get<std::int64_t>());
    } else if (j.contains("start") && j.contains("end")) {
      frames.push_back(range_to_midpoint(j.at("start").get<std::int64_t>(),
                                         j.at("end").get<std::int64_t>()));
    } else {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected \"frame\" or \"start\"/\"end\"");
    }
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

}  // namespace curator::splitter
