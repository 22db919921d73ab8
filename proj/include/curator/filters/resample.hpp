#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace curator::filters {

using CategoryDistribution = std::map<std::string, double>;

class ResampleError : public std::invalid_argument {
 public:
  enum class Kind { CategoryMismatch, ZeroObserved, NotNormalized };

  ResampleError(Kind kind, const std::string& what) : std::invalid_argument(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Per-category acceptance probability that reshapes `observed` into
/// `target`: (target/observed) scaled so the largest is exactly 1.
CategoryDistribution resample_weights(const CategoryDistribution& observed,
                                      const CategoryDistribution& target);

/// Distribution after accepting each category with the given probability.
CategoryDistribution expected_after_sampling(const CategoryDistribution& observed,
                                             const CategoryDistribution& acceptance);

/// Reference category mix for the pre-training corpus (fractions, sum 1).
const std::vector<std::pair<std::string, double>>& default_category_targets();

/// Deterministic Bernoulli draw keyed on clip id and seed.
bool accept_sample(double acceptance, const std::string& clip_id, std::uint64_t seed);

}  // namespace curator::filters
