#include "curator/filters/resample.hpp"

#include <algorithm>
#include <cmath>

#include "curator/common/hash.hpp"

namespace curator::filters {
namespace {

void check_normalized(const CategoryDistribution& d, const char* name) {
  double sum = 0.0;
  for (const auto& [_, p] : d) {
    if (!std::isfinite(p) || p < 0.0) {
      throw ResampleError(ResampleError::Kind::NotNormalized,
                          std::string("resample: negative entry in ") + name);
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ResampleError(ResampleError::Kind::NotNormalized,
                        std::string("resample: ") + name + " does not sum to 1");
  }
}

}  // namespace

CategoryDistribution resample_weights(const CategoryDistribution& observed,
                                      const CategoryDistribution& target) {
  if (observed.size() != target.size() ||
      !std::equal(observed.begin(), observed.end(), target.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw ResampleError(ResampleError::Kind::CategoryMismatch,
                        "resample: observed and target cover different categories");
  }
  for (const auto& [name, p] : observed) {
    if (p <= 0.0) {
      throw ResampleError(ResampleError::Kind::ZeroObserved,
                          "resample: category '" + name + "' was never observed");
    }
  }
  check_normalized(observed, "observed");
  check_normalized(target, "target");

  CategoryDistribution raw;
  double max_raw = 0.0;
  for (const auto& [name, p] : observed) {
    const double r = target.at(name) / p;
    raw[name] = r;
    max_raw = std::max(max_raw, r);
  }
  for (auto& [_, r] : raw) r /= max_raw;
  return raw;
}

CategoryDistribution expected_after_sampling(const CategoryDistribution& observed,
                                             const CategoryDistribution& acceptance) {
  CategoryDistribution out;
  double total = 0.0;
  for (const auto& [name, p] : observed) {
    const double kept = p * acceptance.at(name);
    out[name] = kept;
    total += kept;
  }
  if (total > 0.0) {
    for (auto& [_, v] : out) v /= total;
  }
  return out;
}

const std::vector<std::pair<std::string, double>>& default_category_targets() {
  static const std::vector<std::pair<std::string, double>> targets = {
      {"Driving", 0.11},
      {"Hand motion and object manipulation", 0.16},
      {"Human motion and activity", 0.10},
      {"Spatial awareness and navigation", 0.16},
      {"First person point-of-view", 0.08},
      {"Nature dynamics", 0.20},
      {"Dynamic camera movements", 0.08},
      {"Synthetically rendered", 0.04},
      {"Others", 0.07},
  };
  return targets;
}

bool accept_sample(double acceptance, const std::string& clip_id, std::uint64_t seed) {
  std::uint64_t state = fnv1a64(clip_id) ^ seed;
  const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  return u < acceptance;
}

}  // namespace curator::filters
