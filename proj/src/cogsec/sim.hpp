#pragma once

// Synthetic WLAN test bed: nodes spread over access points emit one activity
// window per epoch from a Gaussian usage profile; a configurable share of
// nodes deviates from its profile after an onset epoch. Also hosts the
// experiment harnesses (detection rate, input-width sweep, lr x iteration
// sweep).

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogsec/csm.hpp"

namespace cogsec::sim {

// Raw counters sampled per window, in this order.
inline constexpr std::size_t kCounterCount = 7;
const std::array<std::string, kCounterCount>& counter_names();

struct NodeClassProfile {
  std::string name;
  std::array<double, kCounterCount> mean{};
  std::array<double, kCounterCount> stddev{};
};

struct DeviationSpec {
  double malicious_fraction = 0.2;
  std::size_t onset_epoch = 60;
  std::array<double, kCounterCount> shift{5, 5, 5, 5, 5, 5, 5};  // additive, in units of the node's stddev
  bool simultaneous = true;

  static std::array<double, kCounterCount> uniform_shift(double sigmas);
};

struct SimConfig {
  std::size_t node_count = 60;
  std::size_t ap_count = 6;
  std::size_t epochs = 65;
  std::uint64_t seed = 1;
  Timestamp window_ms = 60000;
  std::size_t calibration_epochs = 10;
  std::size_t deviation_epochs = 5;  // epochs after onset used by the detection experiment
  double node_spread = 0.2;          // per-node profile scale in [1 - spread, 1 + spread]
  std::vector<NodeClassProfile> classes = default_classes();
  DeviationSpec deviation{};

  void validate() const;
  static std::vector<NodeClassProfile> default_classes();
};

nlohmann::json to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& doc);

struct TraceEntry {
  std::size_t epoch = 0;
  std::size_t node_index = 0;
  bool malicious = false;  // node belongs to the deviating set
  bool shifted = false;    // this window carries the deviation
  NodeEvent event;
};

struct Trace {
  std::vector<TraceEntry> entries;  // epoch-major, node index within an epoch
  std::vector<PadlFingerprint> padls;
  std::vector<bool> malicious;
};

Trace generate_trace(const SimConfig& config);

// One JSON document per line per entry.
void write_trace(std::ostream& out, const Trace& trace);
Trace read_trace(std::istream& in);

struct SimMetrics {
  std::size_t training_set_size = 0;
  std::uint64_t seed = 0;
  std::size_t node_count = 0;
  std::size_t injected_malicious = 0;
  std::size_t detected_malicious = 0;
  std::size_t false_positive_nodes = 0;
  bool zero_injected = false;  // detection_rate reported as 1.0 by convention
  double detection_rate = 0.0;
  double false_positive_rate = 0.0;
  double mean_eval_latency_ms = 0.0;
  double mean_cached_eval_latency_ms = 0.0;
  std::uint64_t cached_evaluations = 0;
  std::vector<double> detection_curve;  // cumulative detection rate per epoch from onset
};

nlohmann::json to_json(const SimMetrics& m);

// Runs the trace through a CSM (auto-approve admission): calibrates every
// node's OM after `calibration_epochs`, accumulates `training_set_size`
// patterns, then lets deviations start and measures detection over
// `deviation_epochs` windows. Requires calibration_epochs +
// training_set_size + deviation_epochs <= epochs.
SimMetrics run_detection_experiment(SimConfig sim, CsmConfig csm, std::size_t training_set_size);

// Headless run of the full trace through a CSM. An interactive admission
// policy is replaced by auto-approval (there is no operator); every
// registered node is recalibrated after `calibration_epochs`.
struct SimulationRun {
  Trace trace;
  std::vector<AuditRecord> audit;
  std::string snapshot_text;
  nlohmann::json summary;
};

SimulationRun run_simulation(const SimConfig& sim, CsmConfig csm);

// Fixed synthetic mapping used by the sweeps: targets are a random sigmoid
// teacher over `informative` latent features in [0,1]; an input width D
// exposes the first min(D, informative) latent features plus D - informative
// pure-noise features.
struct SweepTask {
  std::size_t train_samples = 60;
  std::size_t test_samples = 200;
  std::size_t informative = 20;
  std::size_t hidden = 12;
  std::size_t outputs = 8;
  std::uint64_t seed = 7;
};

nlohmann::json to_json(const SweepTask& task);
SweepTask sweep_task_from_json(const nlohmann::json& doc);

struct TaskData {
  std::vector<mlp::Sample> train;
  std::vector<mlp::Sample> test;
};

TaskData make_task_data(const SweepTask& task, std::size_t input_dim);

struct NeuronSweepRow {
  std::size_t inputs = 0;
  double train_error = 0.0;
  double test_error = 0.0;
};

struct TrainSweepCell {
  double learning_rate = 0.0;
  std::size_t iterations = 0;
  double train_error = 0.0;
  double test_error = 0.0;
};

std::vector<NeuronSweepRow> sweep_input_neurons(std::span<const std::size_t> dims, const SweepTask& task,
                                                const mlp::TrainingConfig& training);

// Full factorial grid at input width `input_dim`. Rows are ordered by
// learning rate, then iterations, in the given order.
std::vector<TrainSweepCell> sweep_lr_iterations(std::span<const double> learning_rates,
                                                std::span<const std::size_t> iterations, const SweepTask& task,
                                                const mlp::TrainingConfig& training, std::size_t input_dim = 20);

}  // namespace cogsec::sim
