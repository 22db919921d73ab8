#include "curator/filters/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace curator::filters {

void MlpWeights::validate() const {
  if (layers.empty()) throw MlpError(MlpError::Kind::BadFormat, "mlp: no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.rows <= 0 || l.cols <= 0 ||
        l.weights.size() != static_cast<std::size_t>(l.rows) * l.cols ||
        l.bias.size() != static_cast<std::size_t>(l.rows)) {
      throw MlpError(MlpError::Kind::DimensionMismatch,
                     "mlp: layer " + std::to_string(i) + " has inconsistent shape");
    }
    if (i > 0 && l.cols != layers[i - 1].rows) {
      throw MlpError(MlpError::Kind::DimensionMismatch,
                     "mlp: layer " + std::to_string(i) + " input does not chain");
    }
    auto finite = [](double x) { return std::isfinite(x); };
    if (!std::all_of(l.weights.begin(), l.weights.end(), finite) ||
        !std::all_of(l.bias.begin(), l.bias.end(), finite)) {
      throw MlpError(MlpError::Kind::NonFiniteWeight,
                     "mlp: layer " + std::to_string(i) + " has a non-finite entry");
    }
  }
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(output_dim())) {
    throw MlpError(MlpError::Kind::DimensionMismatch, "mlp: label count != output dim");
  }
}

MlpWeights MlpWeights::from_json(const nlohmann::json& j) {
  MlpWeights w;
  try {
    const std::string head = j.value("head", "");
    if (head == "sigmoid") {
      w.head = HeadType::Sigmoid;
    } else if (head == "softmax") {
      w.head = HeadType::Softmax;
    } else {
      throw MlpError(MlpError::Kind::BadFormat, "mlp: head must be sigmoid or softmax");
    }
    if (j.contains("labels")) w.labels = j.at("labels").get<std::vector<std::string>>();
    for (const auto& lj : j.at("layers")) {
      DenseLayer l;
      l.rows = lj.at("rows").get<int>();
      l.cols = lj.at("cols").get<int>();
      l.weights = lj.at("data").get<std::vector<double>>();
      l.bias = lj.at("bias").get<std::vector<double>>();
      w.layers.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw MlpError(MlpError::Kind::BadFormat, std::string("mlp: ") + e.what());
  }
  w.validate();
  return w;
}

MlpWeights MlpWeights::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open MLP weights " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw MlpError(MlpError::Kind::BadFormat, path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json MlpWeights::to_json() const {
  nlohmann::json j;
  j["head"] = head == HeadType::Sigmoid ? "sigmoid" : "softmax";
  if (!labels.empty()) j["labels"] = labels;
  auto& arr = j["layers"] = nlohmann::json::array();
  for (const auto& l : layers) {
    arr.push_back({{"rows", l.rows}, {"cols", l.cols}, {"data", l.weights}, {"bias", l.bias}});
  }
  return j;
}

std::vector<double> mlp_infer(std::span<const double> input, const MlpWeights& w) {
  w.validate();
  if (input.size() != static_cast<std::size_t>(w.input_dim())) {
    throw MlpError(MlpError::Kind::DimensionMismatch,
                   "mlp: input has " + std::to_string(input.size()) + " dims, expected " +
                       std::to_string(w.input_dim()));
  }
  std::vector<double> x(input.begin(), input.end());
  for (std::size_t li = 0; li < w.layers.size(); ++li) {
    const auto& l = w.layers[li];
    std::vector<double> y(l.bias);
    for (int r = 0; r < l.rows; ++r) {
      const double* row = &l.weights[static_cast<std::size_t>(r) * l.cols];
      double acc = 0.0;
      for (int c = 0; c < l.cols; ++c) acc += row[c] * x[c];
      y[r] += acc;
    }
    if (li + 1 < w.layers.size()) {
      for (double& v : y) v = std::max(0.0, v);
    }
    x = std::move(y);
  }
  if (w.head == HeadType::Sigmoid) {
    for (double& v : x) v = 1.0 / (1.0 + std::exp(-v));
    return x;
  }
  const double mx = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (double& v : x) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : x) v /= sum;
  return x;
}

std::vector<double> mlp_infer(std::span<const float> input, const MlpWeights& weights) {
  std::vector<double> x(input.begin(), input.end());
  return mlp_infer(std::span<const double>(x), weights);
}

}  // namespace curator::filters
