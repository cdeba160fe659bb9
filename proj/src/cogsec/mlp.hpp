#pragma once

// Sigmoid multilayer perceptron with per-sample backpropagation.
//
// Every neuron computes sigmoid(sum_i x_i * w_i + b). Weights are stored
// row-major per layer: row k holds the incoming weights of neuron k.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace cogsec::mlp {

struct LayerSpec {
  std::vector<std::size_t> sizes;

  // Throws Structural if fewer than two entries or any entry is zero.
  void validate() const;
  std::size_t inputs() const { return sizes.front(); }
  std::size_t outputs() const { return sizes.back(); }
  bool operator==(const LayerSpec&) const = default;
};

struct TrainingConfig {
  double learning_rate = 0.2;
  std::size_t iterations = 10000;
  std::uint64_t seed = 1;
  double init_scale = 0.5;

  void validate() const;
  bool operator==(const TrainingConfig&) const = default;
};

struct Layer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  // outputs x inputs, row-major
  std::vector<double> biases;   // outputs

  double& weight(std::size_t neuron, std::size_t input) { return weights[neuron * inputs + input]; }
  double weight(std::size_t neuron, std::size_t input) const { return weights[neuron * inputs + input]; }
  std::span<const double> row(std::size_t neuron) const {
    return std::span<const double>(weights).subspan(neuron * inputs, inputs);
  }
  bool operator==(const Layer&) const = default;
};

struct NetworkWeights {
  std::vector<Layer> layers;

  LayerSpec spec() const;
  std::size_t inputs() const { return layers.front().inputs; }
  std::size_t outputs() const { return layers.back().outputs; }
  std::size_t parameter_count() const;
  // Structural if layer shapes do not chain, Validation if any value is non-finite.
  void validate() const;
  bool all_finite() const;
  bool operator==(const NetworkWeights&) const = default;

  // Zero-valued network with the given shape.
  static NetworkWeights zeros(const LayerSpec& spec);
};

// Gradients share the weight layout.
using Gradient = NetworkWeights;

struct Sample {
  std::vector<double> input;
  std::vector<double> target;
};

struct TrainResult {
  NetworkWeights net;
  std::vector<double> error_history;  // MSE after each pass
};

double sigmoid(double y) noexcept;

NetworkWeights init_weights(const LayerSpec& spec, const TrainingConfig& config);

double neuron_output(std::span<const double> inputs, std::span<const double> weights, double bias);

std::vector<double> forward(const NetworkWeights& net, std::span<const double> input);

// Mean over samples and output components of the squared residual.
double mean_squared_error(const NetworkWeights& net, std::span<const Sample> data);

// Analytic gradient of 0.5 * ||forward(input) - target||^2.
Gradient gradient(const NetworkWeights& net, const Sample& sample);

// `iterations` passes of per-sample SGD in data order. Throws Validation on
// empty data and Training if a pass produces non-finite weights.
TrainResult train_backprop(NetworkWeights net, std::span<const Sample> data, const TrainingConfig& config);

// Structured-text form: {"format":"cogsec.mlp","version":1,"sizes":[...],
// "layers":[{"weights":[...],"biases":[...]}]}. Doubles use the shortest
// decimal that round-trips to the same bits.
nlohmann::json to_json(const NetworkWeights& net);
NetworkWeights weights_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const LayerSpec& spec);
LayerSpec layer_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const TrainingConfig& config);
TrainingConfig training_config_from_json(const nlohmann::json& doc, const TrainingConfig& defaults = {});

}  // namespace cogsec::mlp
