#pragma once

// Relational behavior pattern generator: node activity -> features ->
// operational-matrix network -> behavior pattern.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogsec/mlp.hpp"
#include "cogsec/types.hpp"

namespace cogsec {

enum class Service : std::size_t { DataServer = 0, Internet = 1 };
inline constexpr std::size_t kServiceCount = 2;

struct ServiceUsage {
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  std::uint64_t sessions = 0;
  bool operator==(const ServiceUsage&) const = default;
};

struct NodeActivity {
  NodeId node_id;
  Timestamp window_start = 0;
  Timestamp window_end = 0;
  std::array<ServiceUsage, kServiceCount> services{};
  std::string ap_id;
  std::uint64_t failed_auth_count = 0;

  void validate() const;
  const ServiceUsage& usage(Service s) const { return services[static_cast<std::size_t>(s)]; }
  ServiceUsage& usage(Service s) { return services[static_cast<std::size_t>(s)]; }
  bool operator==(const NodeActivity&) const = default;
};

nlohmann::json to_json(const NodeActivity& activity);
NodeActivity activity_from_json(const nlohmann::json& doc);

// Fixed feature order. Per service (data server first, then internet):
//   bytes_up, bytes_down, sessions, up_rate, down_rate, up_share,
//   bytes_per_session, session_rate
// then failed_auth, total_bytes, internet_share, window_seconds.
inline constexpr std::size_t kFeatureCount = 20;
const std::array<std::string, kFeatureCount>& feature_names();

// Per-feature cap for min-max scaling (minimum is always 0).
using NormTable = std::map<std::string, double>;
NormTable default_norms();

struct FeatureVector {
  std::vector<double> values;  // each in [0, 1]
};

// All kFeatureCount features. Throws Config when a norm entry is missing or
// non-positive.
FeatureVector encode_activity(const NodeActivity& activity, const NormTable& norms);

// Usage-profile target for generator calibration: normalized per-service
// bytes up/down and sessions, failed authentications and total bytes.
inline constexpr std::size_t kProfileTargetCount = 8;
std::vector<double> profile_targets(const NodeActivity& activity, const NormTable& norms);

struct GeneratorConfig {
  std::size_t feature_dim = kFeatureCount;
  std::size_t hidden = 12;
  std::size_t pattern_dim = kProfileTargetCount;
  NormTable norms = default_norms();
  mlp::TrainingConfig training{};
  // Calibration widening: each recent window also contributes this many
  // copies with every counter scaled by 2^u, u uniform in [-spread, spread].
  std::size_t calibration_copies = 4;
  double calibration_spread = 1.0;

  mlp::LayerSpec layer_spec() const { return {{feature_dim, hidden, pattern_dim}}; }
  void validate() const;
};

nlohmann::json to_json(const GeneratorConfig& config);
GeneratorConfig generator_config_from_json(const nlohmann::json& doc);

// Encodes activity into the first `feature_dim` features and identifies the
// encoding so stale operational matrices are rejected.
class ActivityEncoder {
 public:
  explicit ActivityEncoder(const GeneratorConfig& config);

  FeatureVector encode(const NodeActivity& activity) const;
  std::size_t dimension() const { return dimension_; }
  const NormTable& norms() const { return norms_; }
  // "features-v1/d<D>/<digest of the norm table>"
  const std::string& encoding_id() const { return encoding_id_; }

 private:
  NormTable norms_;
  std::size_t dimension_;
  std::string encoding_id_;
};

BehaviorPattern generate_pattern(const OperationalMatrix& om, const NodeActivity& activity,
                                 const ActivityEncoder& encoder);

// Returns `windows` followed by `copies` rescaled copies of each window
// (see GeneratorConfig). Deterministic in `seed`.
std::vector<NodeActivity> widen_calibration(std::span<const NodeActivity> windows, std::size_t copies, double spread,
                                            std::uint64_t seed);

// Trains a fresh generator network on (encode(history[i]), targets[i]).
OperationalMatrix calibrate_om(std::span<const NodeActivity> history, std::span<const std::vector<double>> targets,
                               const mlp::TrainingConfig& training, const mlp::LayerSpec& spec,
                               const ActivityEncoder& encoder, std::string issuer, Timestamp issued_at);

}  // namespace cogsec
