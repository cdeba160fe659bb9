#pragma once

// Policy & configuration assignment: a two-hidden-layer auto-associator
// trained on a node's pattern history scores how far the current pattern
// strays from it; the score is compared with the admin threshold theta.

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cogsec/behavior.hpp"
#include "cogsec/mlp.hpp"
#include "cogsec/repository.hpp"
#include "cogsec/types.hpp"

namespace cogsec {

struct PolicyConfig {
  double theta = 0.1;
  mlp::LayerSpec mfnn_spec{{8, 24, 12, 8}};
  mlp::TrainingConfig training{};
  std::size_t min_history = 5;

  // Throws Config unless theta is in (0,1), the spec is
  // [P, hidden1, hidden2, P] and min_history >= 1.
  void validate(std::size_t pattern_dim) const;
};

nlohmann::json to_json(const PolicyConfig& config);
PolicyConfig policy_config_from_json(const nlohmann::json& doc);

enum class Decision { Normal, Deviated };
enum class ScoredBy { Neural, Bootstrap };

const char* to_string(Decision d) noexcept;
const char* to_string(ScoredBy s) noexcept;

struct DeviationReport {
  NodeId node_id;
  double score = 0.0;
  double theta_used = 0.0;
  Decision decision = Decision::Normal;
  std::size_t history_len = 0;
  ScoredBy scored_by = ScoredBy::Bootstrap;
};

nlohmann::json to_json(const DeviationReport& report);
DeviationReport deviation_report_from_json(const nlohmann::json& doc);

// Normal only when score is strictly below theta.
Decision decide(double score, double theta) noexcept;

// Trains the auto-associator on (bh, bh) pairs. Returns nullopt when the
// history is shorter than min_history (bootstrap mode).
std::optional<mlp::NetworkWeights> train_policy_net(const PatternHistory& history, const PolicyConfig& config);

// Mean absolute reconstruction error of bh through the auto-associator.
double deviation_score(const mlp::NetworkWeights& mfnn, const BehaviorPattern& bh);

// Mean absolute distance between bh and the component-wise history mean;
// 0 for an empty history.
double bootstrap_score(const BehaviorPattern& bh, const PatternHistory& history);

struct Evaluation {
  DeviationReport report;
  std::optional<mlp::NetworkWeights> trained_net;  // set when a net was trained for this call
};

// Neural scoring with `cached_net` (or a freshly trained net) once the
// history reaches min_history, bootstrap scoring before that.
Evaluation evaluate(const BehaviorPattern& bh, const PatternHistory& history, const PolicyConfig& config,
                    const mlp::NetworkWeights* cached_net);

// All-zero generator weights: every activity maps to the neutral pattern.
// Throws Structural if `spec` is not the configured generator shape.
OperationalMatrix conservative_om(const mlp::LayerSpec& spec, const GeneratorConfig& generator,
                                  const ActivityEncoder& encoder, std::string issuer, Timestamp issued_at);

}  // namespace cogsec
