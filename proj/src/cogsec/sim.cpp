#include "cogsec/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include "cogsec/error.hpp"

namespace cogsec::sim {

namespace {

// Portable samplers: the standard distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

std::string hex_byte(std::uint64_t v) {
  static constexpr char kHex[] = "0123456789abcdef";
  return {kHex[(v >> 4) & 0xF], kHex[v & 0xF]};
}

PadlFingerprint synth_padl(Rng& rng, std::size_t index) {
  static const char* kChipsets[] = {"ath9k-ar9380", "iwlwifi-7265", "brcmfmac-43455", "mt7921e", "rtl8822ce"};
  static const char* kBands[] = {"2.4GHz", "2.4GHz|5GHz", "2.4GHz|5GHz|6GHz"};
  // Locally administered unicast prefix; the index makes every address unique.
  std::string mac = "02:" + hex_byte(index >> 8) + ":" + hex_byte(index);
  for (int i = 0; i < 3; ++i) mac += ":" + hex_byte(rng.below(256));
  return PadlFingerprint({
      {padl_attr::kHardwareAddress, mac},
      {padl_attr::kChipset, std::string(kChipsets[rng.below(5)])},
      {padl_attr::kBands, std::string(kBands[rng.below(3)])},
      {padl_attr::kCarrierOffsetPpm, rng.uniform(-20.0, 20.0)},
      {padl_attr::kIqGainImbalance, rng.uniform(-0.5, 0.5)},
      {padl_attr::kIqPhaseImbalance, rng.uniform(-3.0, 3.0)},
      {padl_attr::kTxPowerOffsetDb, rng.uniform(-2.0, 2.0)},
  });
}

std::uint64_t to_counter(double v) { return static_cast<std::uint64_t>(std::llround(std::max(0.0, v))); }

template <std::size_t N>
std::array<double, N> array_from_json(const nlohmann::json& doc, const char* what) {
  if (doc.is_number()) {
    std::array<double, N> out{};
    out.fill(doc.get<double>());
    return out;
  }
  auto v = doc.get<std::vector<double>>();
  if (v.size() != N) fail(ErrorCode::Config, std::string(what) + " must have " + std::to_string(N) + " entries");
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

double rate(std::size_t num, std::size_t den) { return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0; }

// Feeds the trace epoch by epoch and recalibrates every registered node once
// the calibration windows have been seen.
template <class OnOutcome>
void drive_trace(const Trace& trace, Csm& csm, const SimConfig& sim, OnOutcome&& on_outcome) {
  std::size_t i = 0;
  for (std::size_t epoch = 0; epoch < sim.epochs; ++epoch) {
    for (; i < trace.entries.size() && trace.entries[i].epoch == epoch; ++i) {
      on_outcome(trace.entries[i], csm.handle_event(trace.entries[i].event));
    }
    if (epoch + 1 != sim.calibration_epochs) continue;
    for (const auto& padl : trace.padls) {
      if (csm.repository_unsafe().classify_padl(padl) != NodeStatus::Authorized) continue;
      csm.apply_admin_action({AdminActionKind::Recalibrate, padl.digest(), std::nullopt, "calibration",
                              static_cast<Timestamp>(epoch + 1) * sim.window_ms});
    }
  }
}

}  // namespace

const std::array<std::string, kCounterCount>& counter_names() {
  static const std::array<std::string, kCounterCount> names = {
      "data.bytes_up", "data.bytes_down", "data.sessions", "internet.bytes_up",
      "internet.bytes_down", "internet.sessions", "failed_auth",
  };
  return names;
}

std::array<double, kCounterCount> DeviationSpec::uniform_shift(double sigmas) {
  std::array<double, kCounterCount> s;
  s.fill(sigmas);
  return s;
}

std::vector<NodeClassProfile> SimConfig::default_classes() {
  auto with_cv = [](std::string name, std::array<double, kCounterCount> mean) {
    NodeClassProfile p{std::move(name), mean, {}};
    for (std::size_t i = 0; i < kCounterCount; ++i) p.stddev[i] = 0.1 * mean[i];
    p.stddev[6] = 0.8;  // failed authentications are small counts
    return p;
  };
  return {
      with_cv("office", {1.2e6, 6.0e6, 15, 0.8e6, 5.0e6, 12, 1.0}),
      with_cv("streaming", {0.4e6, 2.0e6, 6, 1.2e6, 9.0e6, 10, 0.5}),
      with_cv("developer", {2.0e6, 7.0e6, 20, 0.8e6, 4.0e6, 14, 1.5}),
  };
}

void SimConfig::validate() const {
  if (node_count < 1) fail(ErrorCode::Validation, "node_count must be at least 1");
  if (ap_count < 1) fail(ErrorCode::Validation, "ap_count must be at least 1");
  if (epochs < 1) fail(ErrorCode::Validation, "epochs must be at least 1");
  if (window_ms <= 0) fail(ErrorCode::Validation, "window_ms must be positive");
  if (classes.empty()) fail(ErrorCode::Validation, "at least one node class profile is required");
  if (!(node_spread >= 0.0 && node_spread < 1.0)) fail(ErrorCode::Validation, "node_spread must lie in [0, 1)");
  for (const auto& c : classes) {
    for (std::size_t i = 0; i < kCounterCount; ++i) {
      if (!(c.mean[i] >= 0.0) || !(c.stddev[i] >= 0.0)) {
        fail(ErrorCode::Validation, "class '" + c.name + "' has a negative mean or stddev");
      }
    }
  }
  if (!(deviation.malicious_fraction >= 0.0 && deviation.malicious_fraction <= 1.0)) {
    fail(ErrorCode::Validation, "malicious_fraction must lie in [0, 1]");
  }
  if (deviation.onset_epoch < calibration_epochs) {
    fail(ErrorCode::Validation, "deviation onset must not precede the end of calibration");
  }
  for (double s : deviation.shift) {
    if (!std::isfinite(s)) fail(ErrorCode::Validation, "deviation shift must be finite");
  }
}

nlohmann::json to_json(const SimConfig& c) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& p : c.classes) classes.push_back({{"name", p.name}, {"mean", p.mean}, {"stddev", p.stddev}});
  return {{"node_count", c.node_count},
          {"ap_count", c.ap_count},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"window_ms", c.window_ms},
          {"calibration_epochs", c.calibration_epochs},
          {"deviation_epochs", c.deviation_epochs},
          {"node_spread", c.node_spread},
          {"classes", classes},
          {"deviation",
           {{"malicious_fraction", c.deviation.malicious_fraction},
            {"onset_epoch", c.deviation.onset_epoch},
            {"shift", c.deviation.shift},
            {"simultaneous", c.deviation.simultaneous}}}};
}

SimConfig sim_config_from_json(const nlohmann::json& doc) {
  SimConfig c;
  try {
    c.node_count = doc.value("node_count", c.node_count);
    c.ap_count = doc.value("ap_count", c.ap_count);
    c.epochs = doc.value("epochs", c.epochs);
    c.seed = doc.value("seed", c.seed);
    c.window_ms = doc.value("window_ms", c.window_ms);
    c.calibration_epochs = doc.value("calibration_epochs", c.calibration_epochs);
    c.deviation_epochs = doc.value("deviation_epochs", c.deviation_epochs);
    c.node_spread = doc.value("node_spread", c.node_spread);
    if (doc.contains("classes")) {
      c.classes.clear();
      for (const auto& p : doc.at("classes")) {
        c.classes.push_back({p.value("name", std::string{"class"}), array_from_json<kCounterCount>(p.at("mean"), "mean"),
                             array_from_json<kCounterCount>(p.at("stddev"), "stddev")});
      }
    }
    if (doc.contains("deviation")) {
      const auto& d = doc.at("deviation");
      c.deviation.malicious_fraction = d.value("malicious_fraction", c.deviation.malicious_fraction);
      c.deviation.onset_epoch = d.value("onset_epoch", c.deviation.onset_epoch);
      if (d.contains("shift")) c.deviation.shift = array_from_json<kCounterCount>(d.at("shift"), "shift");
      c.deviation.simultaneous = d.value("simultaneous", c.deviation.simultaneous);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("malformed sim section: ") + e.what());
  }
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Config, e.what());
  }
  return c;
}

Trace generate_trace(const SimConfig& config) {
  config.validate();
  Rng rng(config.seed);
  Trace trace;

  struct NodePlan {
    NodeClassProfile profile;
    std::string ap;
    std::size_t onset = 0;
  };
  std::vector<NodePlan> plans(config.node_count);
  for (std::size_t n = 0; n < config.node_count; ++n) {
    trace.padls.push_back(synth_padl(rng, n));
    NodePlan& plan = plans[n];
    plan.profile = config.classes[n % config.classes.size()];
    for (std::size_t k = 0; k < kCounterCount; ++k) {
      const double scale = rng.uniform(1.0 - config.node_spread, 1.0 + config.node_spread);
      plan.profile.mean[k] *= scale;
      plan.profile.stddev[k] *= scale;
    }
    plan.ap = "ap-" + std::to_string(n % config.ap_count);
  }

  // Malicious set: a seeded permutation prefix.
  std::vector<std::size_t> order(config.node_count);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const auto malicious_count =
      static_cast<std::size_t>(std::llround(config.deviation.malicious_fraction * static_cast<double>(config.node_count)));
  trace.malicious.assign(config.node_count, false);
  const std::size_t span = config.epochs > config.deviation.onset_epoch ? config.epochs - config.deviation.onset_epoch : 1;
  for (std::size_t i = 0; i < malicious_count; ++i) {
    const std::size_t n = order[i];
    trace.malicious[n] = true;
    plans[n].onset = config.deviation.simultaneous ? config.deviation.onset_epoch
                                                   : config.deviation.onset_epoch + rng.below(span);
  }

  trace.entries.reserve(config.node_count * config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const Timestamp start = static_cast<Timestamp>(epoch) * config.window_ms;
    for (std::size_t n = 0; n < config.node_count; ++n) {
      const NodePlan& plan = plans[n];
      const bool shifted = trace.malicious[n] && epoch >= plan.onset;
      std::array<double, kCounterCount> v{};
      for (std::size_t k = 0; k < kCounterCount; ++k) {
        v[k] = plan.profile.mean[k] + plan.profile.stddev[k] * rng.normal();
        if (shifted) v[k] += config.deviation.shift[k] * plan.profile.stddev[k];
      }
      TraceEntry entry;
      entry.epoch = epoch;
      entry.node_index = n;
      entry.malicious = trace.malicious[n];
      entry.shifted = shifted;
      entry.event.padl = trace.padls[n];
      NodeActivity& a = entry.event.activity;
      a.node_id = trace.padls[n].digest();
      a.window_start = start;
      a.window_end = start + config.window_ms;
      a.ap_id = plan.ap;
      a.usage(Service::DataServer) = {to_counter(v[0]), to_counter(v[1]), to_counter(v[2])};
      a.usage(Service::Internet) = {to_counter(v[3]), to_counter(v[4]), to_counter(v[5])};
      a.failed_auth_count = to_counter(v[6]);
      entry.event.received_at = a.window_end;
      trace.entries.push_back(std::move(entry));
    }
  }
  return trace;
}

void write_trace(std::ostream& out, const Trace& trace) {
  for (const auto& e : trace.entries) {
    out << nlohmann::json{{"epoch", e.epoch},
                          {"node_index", e.node_index},
                          {"malicious", e.malicious},
                          {"shifted", e.shifted},
                          {"event", to_json(e.event)}}
               .dump()
        << '\n';
  }
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded()) fail(ErrorCode::Validation, "trace line " + std::to_string(lineno) + " is not valid JSON");
    TraceEntry e;
    try {
      e.epoch = doc.at("epoch").get<std::size_t>();
      e.node_index = doc.at("node_index").get<std::size_t>();
      e.malicious = doc.value("malicious", false);
      e.shifted = doc.value("shifted", false);
      e.event = node_event_from_json(doc.at("event"));
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorCode::Validation, "trace line " + std::to_string(lineno) + ": " + ex.what());
    }
    if (e.node_index >= trace.padls.size()) {
      trace.padls.resize(e.node_index + 1);
      trace.malicious.resize(e.node_index + 1, false);
    }
    trace.padls[e.node_index] = e.event.padl;
    trace.malicious[e.node_index] = trace.malicious[e.node_index] || e.malicious;
    trace.entries.push_back(std::move(e));
  }
  return trace;
}

nlohmann::json to_json(const SimMetrics& m) {
  return {{"training_set_size", m.training_set_size},
          {"seed", m.seed},
          {"node_count", m.node_count},
          {"injected_malicious", m.injected_malicious},
          {"detected_malicious", m.detected_malicious},
          {"false_positive_nodes", m.false_positive_nodes},
          {"zero_injected", m.zero_injected},
          {"detection_rate", m.detection_rate},
          {"false_positive_rate", m.false_positive_rate},
          {"mean_eval_latency_ms", m.mean_eval_latency_ms},
          {"mean_cached_eval_latency_ms", m.mean_cached_eval_latency_ms},
          {"cached_evaluations", m.cached_evaluations},
          {"detection_curve", m.detection_curve}};
}

SimMetrics run_detection_experiment(SimConfig sim, CsmConfig csm_config, std::size_t training_set_size) {
  if (training_set_size < 1) fail(ErrorCode::Validation, "training_set_size must be at least 1");
  if (training_set_size > csm_config.repository.history_capacity) {
    fail(ErrorCode::Validation, "training_set_size exceeds the pattern history capacity");
  }
  if (sim.calibration_epochs < 1) fail(ErrorCode::Validation, "the detection experiment needs calibration epochs");
  if (sim.calibration_epochs > csm_config.recent_activity_capacity) {
    fail(ErrorCode::Validation, "calibration_epochs exceeds recent_activity_capacity");
  }
  if (sim.deviation_epochs < 1) fail(ErrorCode::Validation, "deviation_epochs must be at least 1");
  if (sim.calibration_epochs + training_set_size + sim.deviation_epochs > sim.epochs) {
    fail(ErrorCode::Validation, "training_set_size exceeds epochs minus the calibration and deviation windows");
  }
  sim.deviation.onset_epoch = sim.calibration_epochs + training_set_size;
  sim.epochs = sim.deviation.onset_epoch + sim.deviation_epochs;
  csm_config.admin.mode = AdminPolicy::Mode::AutoApproveAll;

  const Trace trace = generate_trace(sim);
  Csm csm(csm_config);

  SimMetrics m;
  m.training_set_size = training_set_size;
  m.seed = sim.seed;
  m.node_count = sim.node_count;
  m.injected_malicious = static_cast<std::size_t>(std::count(trace.malicious.begin(), trace.malicious.end(), true));

  std::vector<std::optional<std::size_t>> detected_at(sim.node_count);
  std::vector<bool> false_positive(sim.node_count, false);

  drive_trace(trace, csm, sim, [&](const TraceEntry& entry, const EventOutcome& outcome) {
    if (outcome.path_taken != PathTaken::AuthorizedRevoked) return;
    if (entry.shifted) {
      detected_at[entry.node_index] = entry.epoch;
    } else {
      false_positive[entry.node_index] = true;
    }
  });

  m.detected_malicious = static_cast<std::size_t>(
      std::count_if(detected_at.begin(), detected_at.end(), [](const auto& d) { return d.has_value(); }));
  m.false_positive_nodes = static_cast<std::size_t>(std::count(false_positive.begin(), false_positive.end(), true));
  m.zero_injected = m.injected_malicious == 0;
  m.detection_rate = m.zero_injected ? 1.0 : rate(m.detected_malicious, m.injected_malicious);
  m.false_positive_rate = rate(m.false_positive_nodes, sim.node_count);

  for (std::size_t epoch = sim.deviation.onset_epoch; epoch < sim.epochs; ++epoch) {
    const auto by_now = std::count_if(detected_at.begin(), detected_at.end(),
                                      [&](const auto& d) { return d.has_value() && *d <= epoch; });
    m.detection_curve.push_back(m.zero_injected ? 1.0 : rate(static_cast<std::size_t>(by_now), m.injected_malicious));
  }

  const EvalStats stats = csm.eval_stats();
  m.mean_eval_latency_ms = stats.mean_ms();
  m.mean_cached_eval_latency_ms = stats.mean_cached_ms();
  m.cached_evaluations = stats.cached_count;
  return m;
}

SimulationRun run_simulation(const SimConfig& sim, CsmConfig csm_config) {
  if (csm_config.admin.mode == AdminPolicy::Mode::Interactive) csm_config.admin.mode = AdminPolicy::Mode::AutoApproveAll;
  SimulationRun run;
  run.trace = generate_trace(sim);
  Csm csm(csm_config);
  std::map<std::string, std::size_t> paths;
  std::size_t shifted_windows = 0;
  drive_trace(run.trace, csm, sim, [&](const TraceEntry& entry, const EventOutcome& outcome) {
    ++paths[to_string(outcome.path_taken)];
    if (entry.shifted) ++shifted_windows;
  });
  run.audit = csm.audit_log();
  run.snapshot_text = csm.snapshot_text();
  const auto& repo = csm.repository_unsafe();
  run.summary = {{"seed", sim.seed},
                 {"node_count", sim.node_count},
                 {"epochs", sim.epochs},
                 {"events", run.trace.entries.size()},
                 {"shifted_windows", shifted_windows},
                 {"malicious_nodes", std::count(run.trace.malicious.begin(), run.trace.malicious.end(), true)},
                 {"registered", repo.registered_count()},
                 {"unregistered", repo.unregistered_count()},
                 {"audit_records", run.audit.size()},
                 {"paths", paths}};
  return run;
}

nlohmann::json to_json(const SweepTask& t) {
  return {{"train_samples", t.train_samples}, {"test_samples", t.test_samples}, {"informative", t.informative},
          {"hidden", t.hidden},               {"outputs", t.outputs},           {"seed", t.seed}};
}

SweepTask sweep_task_from_json(const nlohmann::json& doc) {
  SweepTask t;
  try {
    t.train_samples = doc.value("train_samples", t.train_samples);
    t.test_samples = doc.value("test_samples", t.test_samples);
    t.informative = doc.value("informative", t.informative);
    t.hidden = doc.value("hidden", t.hidden);
    t.outputs = doc.value("outputs", t.outputs);
    t.seed = doc.value("seed", t.seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("malformed sweep task: ") + e.what());
  }
  if (t.train_samples < 1 || t.test_samples < 1 || t.informative < 1 || t.hidden < 1 || t.outputs < 1) {
    fail(ErrorCode::Config, "sweep task sizes must be positive");
  }
  return t;
}

TaskData make_task_data(const SweepTask& task, std::size_t input_dim) {
  if (input_dim < 1) fail(ErrorCode::Validation, "input width must be at least 1");
  Rng teacher_rng(task.seed);
  // Teacher weights scaled so each target has unit-order pre-activation spread.
  const double scale = 3.0 / std::sqrt(static_cast<double>(task.informative));
  std::vector<double> teacher(task.outputs * task.informative);
  for (double& w : teacher) w = scale * teacher_rng.normal();
  std::vector<double> bias(task.outputs);
  for (std::size_t k = 0; k < task.outputs; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < task.informative; ++i) sum += teacher[k * task.informative + i];
    bias[k] = -0.5 * sum;  // centers pre-activations for inputs around 0.5
  }

  // Latent and noise draws come from separate streams so that every width
  // sees the same latent samples.
  Rng latent_rng(task.seed ^ 0x9e3779b97f4a7c15ULL);
  Rng noise_rng(task.seed ^ 0xc2b2ae3d27d4eb4fULL);
  auto make = [&](std::size_t count) {
    std::vector<mlp::Sample> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
      std::vector<double> latent(task.informative);
      for (double& x : latent) x = latent_rng.uniform();
      std::vector<double> noise(input_dim > task.informative ? input_dim - task.informative : 0);
      for (double& x : noise) x = noise_rng.uniform();
      mlp::Sample sample;
      sample.input.assign(latent.begin(), latent.begin() + static_cast<std::ptrdiff_t>(std::min(input_dim, task.informative)));
      sample.input.insert(sample.input.end(), noise.begin(), noise.end());
      sample.target.resize(task.outputs);
      for (std::size_t k = 0; k < task.outputs; ++k) {
        double y = bias[k];
        for (std::size_t i = 0; i < task.informative; ++i) y += teacher[k * task.informative + i] * latent[i];
        sample.target[k] = mlp::sigmoid(y);
      }
      out.push_back(std::move(sample));
    }
    return out;
  };
  TaskData data;
  data.train = make(task.train_samples);
  data.test = make(task.test_samples);
  return data;
}

std::vector<NeuronSweepRow> sweep_input_neurons(std::span<const std::size_t> dims, const SweepTask& task,
                                                const mlp::TrainingConfig& training) {
  if (dims.empty()) fail(ErrorCode::Validation, "input-width range is empty");
  std::vector<NeuronSweepRow> rows;
  for (std::size_t d : dims) {
    const TaskData data = make_task_data(task, d);
    const mlp::LayerSpec spec{{d, task.hidden, task.outputs}};
    auto result = mlp::train_backprop(mlp::init_weights(spec, training), data.train, training);
    rows.push_back({d, result.error_history.back(), mlp::mean_squared_error(result.net, data.test)});
  }
  return rows;
}

std::vector<TrainSweepCell> sweep_lr_iterations(std::span<const double> learning_rates,
                                                std::span<const std::size_t> iterations, const SweepTask& task,
                                                const mlp::TrainingConfig& training, std::size_t input_dim) {
  if (learning_rates.empty() || iterations.empty()) fail(ErrorCode::Validation, "sweep grid is empty");
  const TaskData data = make_task_data(task, input_dim);
  const mlp::LayerSpec spec{{input_dim, task.hidden, task.outputs}};

  std::vector<std::size_t> checkpoints(iterations.begin(), iterations.end());
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  if (checkpoints.front() < 1) fail(ErrorCode::Validation, "iteration counts must be at least 1");

  std::vector<TrainSweepCell> cells;
  for (double lr : learning_rates) {
    mlp::TrainingConfig cfg = training;
    cfg.learning_rate = lr;
    cfg.validate();
    // Per-sample SGD in fixed order has no randomness after initialization,
    // so continuing a run for k more passes equals a fresh run of n + k passes.
    std::vector<TrainSweepCell> by_checkpoint;
    mlp::NetworkWeights net = mlp::init_weights(spec, cfg);
    std::size_t done = 0;
    for (std::size_t target : checkpoints) {
      cfg.iterations = target - done;
      if (cfg.iterations > 0) {
        auto result = mlp::train_backprop(std::move(net), data.train, cfg);
        net = std::move(result.net);
      }
      done = target;
      by_checkpoint.push_back({lr, target, mlp::mean_squared_error(net, data.train),
                               mlp::mean_squared_error(net, data.test)});
    }
    for (std::size_t it : iterations) {
      auto pos = std::lower_bound(checkpoints.begin(), checkpoints.end(), it) - checkpoints.begin();
      cells.push_back(by_checkpoint[static_cast<std::size_t>(pos)]);
    }
  }
  return cells;
}

}  // namespace cogsec::sim
