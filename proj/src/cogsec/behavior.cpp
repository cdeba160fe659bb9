#include "cogsec/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "cogsec/error.hpp"

namespace cogsec {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double scale(const NormTable& norms, const std::string& name, double raw) {
  auto it = norms.find(name);
  if (it == norms.end()) fail(ErrorCode::Config, "normalization table has no entry for feature '" + name + "'");
  if (!(it->second > 0.0) || !std::isfinite(it->second)) {
    fail(ErrorCode::Config, "normalization cap for '" + name + "' must be positive");
  }
  return std::clamp(raw / it->second, 0.0, 1.0);
}

std::array<double, kFeatureCount> raw_features(const NodeActivity& a) {
  std::array<double, kFeatureCount> raw{};
  const double seconds = static_cast<double>(a.window_end - a.window_start) / 1000.0;
  double total = 0.0;
  for (std::size_t s = 0; s < kServiceCount; ++s) {
    const auto& u = a.services[s];
    const double up = static_cast<double>(u.bytes_up);
    const double down = static_cast<double>(u.bytes_down);
    const double sessions = static_cast<double>(u.sessions);
    double* f = raw.data() + s * 8;
    f[0] = up;
    f[1] = down;
    f[2] = sessions;
    f[3] = up / seconds;
    f[4] = down / seconds;
    f[5] = ratio(up, up + down);
    f[6] = ratio(up + down, sessions);
    f[7] = sessions / (seconds / 60.0);
    total += up + down;
  }
  const auto& inet = a.usage(Service::Internet);
  raw[16] = static_cast<double>(a.failed_auth_count);
  raw[17] = total;
  raw[18] = ratio(static_cast<double>(inet.bytes_up + inet.bytes_down), total);
  raw[19] = seconds;
  return raw;
}

}  // namespace

void NodeActivity::validate() const {
  if (window_end <= window_start) fail(ErrorCode::Validation, "activity window must end after it starts");
}

nlohmann::json to_json(const NodeActivity& a) {
  nlohmann::json services = nlohmann::json::object();
  const char* names[kServiceCount] = {"data_server", "internet"};
  for (std::size_t s = 0; s < kServiceCount; ++s) {
    services[names[s]] = {{"bytes_up", a.services[s].bytes_up},
                          {"bytes_down", a.services[s].bytes_down},
                          {"sessions", a.services[s].sessions}};
  }
  return {{"node_id", a.node_id},   {"window_start", a.window_start},
          {"window_end", a.window_end}, {"services", services},
          {"ap_id", a.ap_id},       {"failed_auth_count", a.failed_auth_count}};
}

NodeActivity activity_from_json(const nlohmann::json& doc) {
  NodeActivity a;
  try {
    a.node_id = doc.value("node_id", std::string{});
    a.window_start = doc.at("window_start").get<Timestamp>();
    a.window_end = doc.at("window_end").get<Timestamp>();
    const char* names[kServiceCount] = {"data_server", "internet"};
    const auto& services = doc.at("services");
    for (std::size_t s = 0; s < kServiceCount; ++s) {
      if (!services.contains(names[s])) continue;
      const auto& u = services.at(names[s]);
      for (const char* key : {"bytes_up", "bytes_down", "sessions"}) {
        if (u.contains(key) && u.at(key).is_number_integer() && u.at(key).get<std::int64_t>() < 0) {
          fail(ErrorCode::Validation, std::string("activity counter ") + key + " is negative");
        }
      }
      a.services[s].bytes_up = u.value("bytes_up", std::uint64_t{0});
      a.services[s].bytes_down = u.value("bytes_down", std::uint64_t{0});
      a.services[s].sessions = u.value("sessions", std::uint64_t{0});
    }
    a.ap_id = doc.value("ap_id", std::string{});
    if (doc.contains("failed_auth_count") && doc["failed_auth_count"].get<std::int64_t>() < 0) {
      fail(ErrorCode::Validation, "failed_auth_count is negative");
    }
    a.failed_auth_count = doc.value("failed_auth_count", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Validation, std::string("malformed node activity: ") + e.what());
  }
  a.validate();
  return a;
}

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "data.bytes_up",     "data.bytes_down",     "data.sessions",     "data.up_rate",
      "data.down_rate",    "data.up_share",       "data.bytes_per_session", "data.session_rate",
      "internet.bytes_up", "internet.bytes_down", "internet.sessions", "internet.up_rate",
      "internet.down_rate", "internet.up_share",  "internet.bytes_per_session", "internet.session_rate",
      "failed_auth",       "total_bytes",         "internet_share",    "window_seconds",
  };
  return names;
}

// Caps sized for 60 s windows of office-style usage.
NormTable default_norms() {
  return {
      {"data.bytes_up", 4.0e6},        {"data.bytes_down", 16.0e6},      {"data.sessions", 40.0},
      {"data.up_rate", 6.0e4},         {"data.down_rate", 2.4e5},        {"data.up_share", 1.0},
      {"data.bytes_per_session", 1.0e6}, {"data.session_rate", 40.0},    {"internet.bytes_up", 4.0e6},
      {"internet.bytes_down", 16.0e6}, {"internet.sessions", 40.0},      {"internet.up_rate", 6.0e4},
      {"internet.down_rate", 2.4e5},   {"internet.up_share", 1.0},       {"internet.bytes_per_session", 1.0e6},
      {"internet.session_rate", 40.0}, {"failed_auth", 10.0},            {"total_bytes", 40.0e6},
      {"internet_share", 1.0},         {"window_seconds", 120.0},
  };
}

FeatureVector encode_activity(const NodeActivity& activity, const NormTable& norms) {
  activity.validate();
  const auto raw = raw_features(activity);
  const auto& names = feature_names();
  FeatureVector fv;
  fv.values.resize(kFeatureCount);
  for (std::size_t i = 0; i < kFeatureCount; ++i) fv.values[i] = scale(norms, names[i], raw[i]);
  return fv;
}

std::vector<double> profile_targets(const NodeActivity& activity, const NormTable& norms) {
  const FeatureVector fv = encode_activity(activity, norms);
  const auto& f = fv.values;
  return {f[0], f[1], f[2], f[8], f[9], f[10], f[16], f[17]};
}

void GeneratorConfig::validate() const {
  if (feature_dim < 1 || feature_dim > kFeatureCount) {
    fail(ErrorCode::Config, "feature_dim must lie in [1, " + std::to_string(kFeatureCount) + "]");
  }
  if (hidden < 1) fail(ErrorCode::Config, "generator hidden layer must have at least one neuron");
  if (pattern_dim < 1) fail(ErrorCode::Config, "pattern_dim must be at least 1");
  for (std::size_t i = 0; i < feature_dim; ++i) {
    const auto& name = feature_names()[i];
    auto it = norms.find(name);
    if (it == norms.end()) fail(ErrorCode::Config, "normalization table has no entry for feature '" + name + "'");
    if (!(it->second > 0.0) || !std::isfinite(it->second)) {
      fail(ErrorCode::Config, "normalization cap for '" + name + "' must be positive");
    }
  }
  if (!(calibration_spread >= 0.0 && calibration_spread <= 4.0)) {
    fail(ErrorCode::Config, "calibration_spread must lie in [0, 4]");
  }
  training.validate();
}

nlohmann::json to_json(const GeneratorConfig& config) {
  return {{"feature_dim", config.feature_dim},
          {"hidden", config.hidden},
          {"pattern_dim", config.pattern_dim},
          {"norms", config.norms},
          {"training", mlp::to_json(config.training)},
          {"calibration_copies", config.calibration_copies},
          {"calibration_spread", config.calibration_spread}};
}

GeneratorConfig generator_config_from_json(const nlohmann::json& doc) {
  GeneratorConfig config;
  try {
    config.feature_dim = doc.value("feature_dim", config.feature_dim);
    config.hidden = doc.value("hidden", config.hidden);
    config.pattern_dim = doc.value("pattern_dim", config.pattern_dim);
    if (doc.contains("norms")) {
      for (const auto& [name, cap] : doc.at("norms").items()) config.norms[name] = cap.get<double>();
    }
    if (doc.contains("training")) config.training = mlp::training_config_from_json(doc.at("training"), config.training);
    config.calibration_copies = doc.value("calibration_copies", config.calibration_copies);
    config.calibration_spread = doc.value("calibration_spread", config.calibration_spread);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("malformed generator section: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::Config, e.what());
  }
  config.validate();
  return config;
}

ActivityEncoder::ActivityEncoder(const GeneratorConfig& config) : norms_(config.norms), dimension_(config.feature_dim) {
  config.validate();
  std::string canon;
  for (std::size_t i = 0; i < dimension_; ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "=%.17g\n", norms_.at(feature_names()[i]));
    canon += feature_names()[i] + buf;
  }
  encoding_id_ = "features-v1/d" + std::to_string(dimension_) + "/" + sha256_hex(canon).substr(0, 16);
}

FeatureVector ActivityEncoder::encode(const NodeActivity& activity) const {
  FeatureVector fv = encode_activity(activity, norms_);
  fv.values.resize(dimension_);
  return fv;
}

BehaviorPattern generate_pattern(const OperationalMatrix& om, const NodeActivity& activity,
                                 const ActivityEncoder& encoder) {
  if (om.encoding_id != encoder.encoding_id()) {
    fail(ErrorCode::Config, "operational matrix was issued for encoding " + om.encoding_id + ", current encoding is " +
                                encoder.encoding_id());
  }
  if (om.generator_net.layers.empty() || om.generator_net.inputs() != encoder.dimension()) {
    fail(ErrorCode::Structural, "operational matrix input width does not match the feature dimension");
  }
  const FeatureVector fv = encoder.encode(activity);
  BehaviorPattern bh;
  bh.values = mlp::forward(om.generator_net, fv.values);
  bh.produced_at = activity.window_end;
  return bh;
}

std::vector<NodeActivity> widen_calibration(std::span<const NodeActivity> windows, std::size_t copies, double spread,
                                            std::uint64_t seed) {
  std::vector<NodeActivity> out(windows.begin(), windows.end());
  out.reserve(windows.size() * (copies + 1));
  std::mt19937_64 rng(seed);
  auto factor = [&] {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::exp2((2.0 * u - 1.0) * spread);
  };
  auto rescale = [&](std::uint64_t v) {
    return static_cast<std::uint64_t>(std::llround(static_cast<double>(v) * factor()));
  };
  for (std::size_t c = 0; c < copies; ++c) {
    for (const auto& w : windows) {
      NodeActivity a = w;
      for (auto& u : a.services) {
        u.bytes_up = rescale(u.bytes_up);
        u.bytes_down = rescale(u.bytes_down);
        u.sessions = rescale(u.sessions);
      }
      a.failed_auth_count = rescale(a.failed_auth_count);
      out.push_back(std::move(a));
    }
  }
  return out;
}

OperationalMatrix calibrate_om(std::span<const NodeActivity> history, std::span<const std::vector<double>> targets,
                               const mlp::TrainingConfig& training, const mlp::LayerSpec& spec,
                               const ActivityEncoder& encoder, std::string issuer, Timestamp issued_at) {
  training.validate();
  spec.validate();
  if (history.empty()) fail(ErrorCode::Validation, "calibration needs at least one activity window");
  if (history.size() != targets.size()) fail(ErrorCode::Validation, "calibration history and targets differ in length");
  if (spec.inputs() != encoder.dimension()) {
    fail(ErrorCode::Structural, "generator input width does not match the feature dimension");
  }
  std::vector<mlp::Sample> samples;
  samples.reserve(history.size());
  for (std::size_t i = 0; i < history.size(); ++i) {
    samples.push_back({encoder.encode(history[i]).values, targets[i]});
  }
  auto trained = mlp::train_backprop(mlp::init_weights(spec, training), samples, training);
  return OperationalMatrix{std::move(trained.net), issued_at, std::move(issuer), encoder.encoding_id()};
}

}  // namespace cogsec
