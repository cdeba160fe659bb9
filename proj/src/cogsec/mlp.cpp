#include "cogsec/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "cogsec/error.hpp"

namespace cogsec::mlp {

namespace {

constexpr int kFormatVersion = 1;

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::Validation, std::string(what) + " contains a non-finite value");
  }
}

// Per-layer activations for one forward pass, reused across samples.
struct Workspace {
  std::vector<std::vector<double>> activations;  // [0] = input, [l+1] = output of layer l
  std::vector<std::vector<double>> deltas;       // dE/dz for each layer

  explicit Workspace(const NetworkWeights& net) {
    activations.resize(net.layers.size() + 1);
    activations[0].resize(net.inputs());
    deltas.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      activations[l + 1].resize(net.layers[l].outputs);
      deltas[l].resize(net.layers[l].outputs);
    }
  }
};

void forward_into(const NetworkWeights& net, std::span<const double> input, Workspace& ws) {
  std::copy(input.begin(), input.end(), ws.activations[0].begin());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    const auto& in = ws.activations[l];
    auto& out = ws.activations[l + 1];
    for (std::size_t k = 0; k < layer.outputs; ++k) {
      const double* w = layer.weights.data() + k * layer.inputs;
      double y = layer.biases[k];
      for (std::size_t i = 0; i < layer.inputs; ++i) y += in[i] * w[i];
      out[k] = sigmoid(y);
    }
  }
}

// Fills ws.deltas with dE/dz where E = 0.5 * ||out - target||^2.
void backward_into(const NetworkWeights& net, std::span<const double> target, Workspace& ws) {
  const std::size_t last = net.layers.size() - 1;
  {
    const auto& out = ws.activations[last + 1];
    for (std::size_t k = 0; k < out.size(); ++k) {
      ws.deltas[last][k] = (out[k] - target[k]) * out[k] * (1.0 - out[k]);
    }
  }
  for (std::size_t l = last; l > 0; --l) {
    const Layer& next = net.layers[l];
    const auto& act = ws.activations[l];
    auto& delta = ws.deltas[l - 1];
    for (std::size_t i = 0; i < next.inputs; ++i) {
      double sum = 0.0;
      for (std::size_t k = 0; k < next.outputs; ++k) sum += next.weight(k, i) * ws.deltas[l][k];
      delta[i] = sum * act[i] * (1.0 - act[i]);
    }
  }
}

void check_sample(const NetworkWeights& net, const Sample& sample) {
  if (sample.input.size() != net.inputs()) {
    fail(ErrorCode::Structural, "sample input has " + std::to_string(sample.input.size()) + " values, network expects " +
                                    std::to_string(net.inputs()));
  }
  if (sample.target.size() != net.outputs()) {
    fail(ErrorCode::Structural, "sample target has " + std::to_string(sample.target.size()) +
                                    " values, network produces " + std::to_string(net.outputs()));
  }
  check_finite(sample.input, "sample input");
  for (double t : sample.target) {
    if (!(t >= 0.0 && t <= 1.0)) fail(ErrorCode::Validation, "sample target outside [0,1]");
  }
}

}  // namespace

void LayerSpec::validate() const {
  if (sizes.size() < 2) fail(ErrorCode::Structural, "layer spec needs at least an input and an output size");
  for (std::size_t s : sizes) {
    if (s == 0) fail(ErrorCode::Structural, "layer spec contains a zero-width layer");
  }
}

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) fail(ErrorCode::Validation, "learning_rate must lie in (0, 1]");
  if (iterations < 1) fail(ErrorCode::Validation, "iterations must be at least 1");
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) fail(ErrorCode::Validation, "init_scale must be finite and >= 0");
}

LayerSpec NetworkWeights::spec() const {
  LayerSpec spec;
  if (layers.empty()) return spec;
  spec.sizes.push_back(layers.front().inputs);
  for (const auto& layer : layers) spec.sizes.push_back(layer.outputs);
  return spec;
}

std::size_t NetworkWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weights.size() + layer.biases.size();
  return n;
}

bool NetworkWeights::all_finite() const {
  for (const auto& layer : layers) {
    for (double w : layer.weights) {
      if (!std::isfinite(w)) return false;
    }
    for (double b : layer.biases) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

void NetworkWeights::validate() const {
  if (layers.empty()) fail(ErrorCode::Structural, "network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    if (layer.inputs == 0 || layer.outputs == 0) fail(ErrorCode::Structural, "network has a zero-width layer");
    if (layer.weights.size() != layer.inputs * layer.outputs || layer.biases.size() != layer.outputs) {
      fail(ErrorCode::Structural, "layer " + std::to_string(l) + " storage does not match its shape");
    }
    if (l > 0 && layers[l - 1].outputs != layer.inputs) {
      fail(ErrorCode::Structural, "layer " + std::to_string(l) + " does not chain with its predecessor");
    }
  }
  if (!all_finite()) fail(ErrorCode::Validation, "network weights contain a non-finite value");
}

NetworkWeights NetworkWeights::zeros(const LayerSpec& spec) {
  spec.validate();
  NetworkWeights net;
  for (std::size_t l = 0; l + 1 < spec.sizes.size(); ++l) {
    Layer layer;
    layer.inputs = spec.sizes[l];
    layer.outputs = spec.sizes[l + 1];
    layer.weights.assign(layer.inputs * layer.outputs, 0.0);
    layer.biases.assign(layer.outputs, 0.0);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

double sigmoid(double y) noexcept { return 1.0 / (1.0 + std::exp(-y)); }

NetworkWeights init_weights(const LayerSpec& spec, const TrainingConfig& config) {
  NetworkWeights net = NetworkWeights::zeros(spec);
  if (!(config.init_scale >= 0.0) || !std::isfinite(config.init_scale)) {
    fail(ErrorCode::Validation, "init_scale must be finite and >= 0");
  }
  std::mt19937_64 rng(config.seed);
  for (auto& layer : net.layers) {
    for (double& w : layer.weights) w = (2.0 * unit_uniform(rng) - 1.0) * config.init_scale;
  }
  return net;
}

double neuron_output(std::span<const double> inputs, std::span<const double> weights, double bias) {
  if (inputs.size() != weights.size()) {
    fail(ErrorCode::Structural, "neuron has " + std::to_string(weights.size()) + " weights but received " +
                                    std::to_string(inputs.size()) + " inputs");
  }
  check_finite(inputs, "neuron input");
  check_finite(weights, "neuron weights");
  if (!std::isfinite(bias)) fail(ErrorCode::Validation, "neuron bias is non-finite");
  double y = bias;
  for (std::size_t i = 0; i < inputs.size(); ++i) y += inputs[i] * weights[i];
  return sigmoid(y);
}

std::vector<double> forward(const NetworkWeights& net, std::span<const double> input) {
  if (net.layers.empty()) fail(ErrorCode::Structural, "network has no layers");
  if (input.size() != net.inputs()) {
    fail(ErrorCode::Structural, "input has " + std::to_string(input.size()) + " values, network expects " +
                                    std::to_string(net.inputs()));
  }
  check_finite(input, "network input");
  Workspace ws(net);
  forward_into(net, input, ws);
  return std::move(ws.activations.back());
}

double mean_squared_error(const NetworkWeights& net, std::span<const Sample> data) {
  if (data.empty()) fail(ErrorCode::Validation, "cannot compute error over an empty dataset");
  Workspace ws(net);
  double total = 0.0;
  for (const Sample& s : data) {
    forward_into(net, s.input, ws);
    const auto& out = ws.activations.back();
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double r = out[k] - s.target[k];
      total += r * r;
    }
  }
  return total / static_cast<double>(data.size() * net.outputs());
}

Gradient gradient(const NetworkWeights& net, const Sample& sample) {
  net.validate();
  check_sample(net, sample);
  Workspace ws(net);
  forward_into(net, sample.input, ws);
  backward_into(net, sample.target, ws);

  Gradient g = NetworkWeights::zeros(net.spec());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Layer& gl = g.layers[l];
    const auto& in = ws.activations[l];
    for (std::size_t k = 0; k < gl.outputs; ++k) {
      const double d = ws.deltas[l][k];
      for (std::size_t i = 0; i < gl.inputs; ++i) gl.weight(k, i) = d * in[i];
      gl.biases[k] = d;
    }
  }
  return g;
}

TrainResult train_backprop(NetworkWeights net, std::span<const Sample> data, const TrainingConfig& config) {
  config.validate();
  net.validate();
  if (data.empty()) fail(ErrorCode::Validation, "training data is empty");
  for (const Sample& s : data) check_sample(net, s);

  TrainResult result;
  result.error_history.reserve(config.iterations);
  Workspace ws(net);
  const double lr = config.learning_rate;

  for (std::size_t pass = 0; pass < config.iterations; ++pass) {
    for (const Sample& s : data) {
      forward_into(net, s.input, ws);
      backward_into(net, s.target, ws);
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Layer& layer = net.layers[l];
        const auto& in = ws.activations[l];
        for (std::size_t k = 0; k < layer.outputs; ++k) {
          const double step = lr * ws.deltas[l][k];
          double* w = layer.weights.data() + k * layer.inputs;
          for (std::size_t i = 0; i < layer.inputs; ++i) w[i] -= step * in[i];
          layer.biases[k] -= step;
        }
      }
    }
    if (!net.all_finite()) {
      fail(ErrorCode::Training, "weights became non-finite during pass " + std::to_string(pass));
    }
    result.error_history.push_back(mean_squared_error(net, data));
  }
  result.net = std::move(net);
  return result;
}

nlohmann::json to_json(const NetworkWeights& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers) {
    layers.push_back({{"weights", layer.weights}, {"biases", layer.biases}});
  }
  return {{"format", "cogsec.mlp"}, {"version", kFormatVersion}, {"sizes", net.spec().sizes}, {"layers", layers}};
}

NetworkWeights weights_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "cogsec.mlp") fail(ErrorCode::Structural, "not a cogsec.mlp document");
    if (doc.at("version").get<int>() != kFormatVersion) {
      fail(ErrorCode::Structural, "unsupported cogsec.mlp version " + doc.at("version").dump());
    }
    LayerSpec spec{doc.at("sizes").get<std::vector<std::size_t>>()};
    NetworkWeights net = NetworkWeights::zeros(spec);
    const auto& layers = doc.at("layers");
    if (layers.size() != net.layers.size()) fail(ErrorCode::Structural, "layer count does not match sizes");
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      net.layers[l].weights = layers[l].at("weights").get<std::vector<double>>();
      net.layers[l].biases = layers[l].at("biases").get<std::vector<double>>();
    }
    net.validate();
    return net;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Structural, std::string("malformed network document: ") + e.what());
  }
}

nlohmann::json to_json(const LayerSpec& spec) { return spec.sizes; }

LayerSpec layer_spec_from_json(const nlohmann::json& doc) {
  try {
    LayerSpec spec{doc.get<std::vector<std::size_t>>()};
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("layer sizes must be a list of positive integers: ") + e.what());
  }
}

nlohmann::json to_json(const TrainingConfig& config) {
  return {{"learning_rate", config.learning_rate},
          {"iterations", config.iterations},
          {"seed", config.seed},
          {"init_scale", config.init_scale}};
}

TrainingConfig training_config_from_json(const nlohmann::json& doc, const TrainingConfig& defaults) {
  TrainingConfig config = defaults;
  try {
    config.learning_rate = doc.value("learning_rate", defaults.learning_rate);
    config.iterations = doc.value("iterations", defaults.iterations);
    config.seed = doc.value("seed", defaults.seed);
    config.init_scale = doc.value("init_scale", defaults.init_scale);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("malformed training section: ") + e.what());
  }
  config.validate();
  return config;
}

}  // namespace cogsec::mlp
