#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace curator::filters {

class MlpError : public std::invalid_argument {
 public:
  enum class Kind { DimensionMismatch, NonFiniteWeight, BadFormat };

  MlpError(Kind kind, const std::string& what) : std::invalid_argument(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// y = W x + b with W stored row-major, rows = outputs, cols = inputs.
struct DenseLayer {
  int rows = 0;
  int cols = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

enum class HeadType { Sigmoid, Softmax };

/// ReLU between layers; the head activation is applied to the last layer.
struct MlpWeights {
  std::vector<DenseLayer> layers;
  HeadType head = HeadType::Sigmoid;
  std::vector<std::string> labels;  // optional names for the outputs

  void validate() const;
  int input_dim() const { return layers.empty() ? 0 : layers.front().cols; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().rows; }

  /// {"head": "sigmoid"|"softmax", "labels": [...],
  ///  "layers": [{"rows", "cols", "data": [row-major], "bias": [...]}]}
  static MlpWeights from_json(const nlohmann::json& j);
  static MlpWeights load(const std::string& path);
  nlohmann::json to_json() const;
};

std::vector<double> mlp_infer(std::span<const double> input, const MlpWeights& weights);
std::vector<double> mlp_infer(std::span<const float> input, const MlpWeights& weights);

}  // namespace curator::filters
