#include "cogsec/policy.hpp"

#include <cmath>

#include "cogsec/error.hpp"

namespace cogsec {

void PolicyConfig::validate(std::size_t pattern_dim) const {
  if (!(theta > 0.0 && theta < 1.0)) fail(ErrorCode::Config, "theta must lie in (0, 1)");
  if (mfnn_spec.sizes.size() != 4) fail(ErrorCode::Config, "policy MFNN must have exactly two hidden layers");
  try {
    mfnn_spec.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Config, e.what());
  }
  if (mfnn_spec.inputs() != pattern_dim || mfnn_spec.outputs() != pattern_dim) {
    fail(ErrorCode::Config, "policy MFNN input and output width must equal the pattern dimension " +
                                std::to_string(pattern_dim));
  }
  if (min_history < 1) fail(ErrorCode::Config, "min_history must be at least 1");
  training.validate();
}

nlohmann::json to_json(const PolicyConfig& config) {
  return {{"theta", config.theta},
          {"mfnn_spec", mlp::to_json(config.mfnn_spec)},
          {"training", mlp::to_json(config.training)},
          {"min_history", config.min_history}};
}

PolicyConfig policy_config_from_json(const nlohmann::json& doc) {
  PolicyConfig config;
  try {
    config.theta = doc.value("theta", config.theta);
    if (doc.contains("mfnn_spec")) config.mfnn_spec = mlp::layer_spec_from_json(doc.at("mfnn_spec"));
    if (doc.contains("training")) config.training = mlp::training_config_from_json(doc.at("training"), config.training);
    config.min_history = doc.value("min_history", config.min_history);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("malformed policy section: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::Config, e.what());
  }
  return config;
}

const char* to_string(Decision d) noexcept { return d == Decision::Normal ? "normal" : "deviated"; }
const char* to_string(ScoredBy s) noexcept { return s == ScoredBy::Neural ? "neural" : "bootstrap"; }

nlohmann::json to_json(const DeviationReport& r) {
  return {{"node_id", r.node_id},
          {"score", r.score},
          {"theta_used", r.theta_used},
          {"decision", to_string(r.decision)},
          {"history_len", r.history_len},
          {"scored_by", to_string(r.scored_by)}};
}

DeviationReport deviation_report_from_json(const nlohmann::json& doc) {
  DeviationReport r;
  r.node_id = doc.at("node_id").get<std::string>();
  r.score = doc.at("score").get<double>();
  r.theta_used = doc.at("theta_used").get<double>();
  r.decision = doc.at("decision").get<std::string>() == "normal" ? Decision::Normal : Decision::Deviated;
  r.history_len = doc.at("history_len").get<std::size_t>();
  r.scored_by = doc.at("scored_by").get<std::string>() == "neural" ? ScoredBy::Neural : ScoredBy::Bootstrap;
  return r;
}

Decision decide(double score, double theta) noexcept { return score < theta ? Decision::Normal : Decision::Deviated; }

std::optional<mlp::NetworkWeights> train_policy_net(const PatternHistory& history, const PolicyConfig& config) {
  if (history.patterns.size() < config.min_history) return std::nullopt;
  std::vector<mlp::Sample> samples;
  samples.reserve(history.patterns.size());
  for (const auto& bh : history.patterns) samples.push_back({bh.values, bh.values});
  return mlp::train_backprop(mlp::init_weights(config.mfnn_spec, config.training), samples, config.training).net;
}

double deviation_score(const mlp::NetworkWeights& mfnn, const BehaviorPattern& bh) {
  if (mfnn.layers.empty() || bh.values.size() != mfnn.inputs() || mfnn.inputs() != mfnn.outputs()) {
    fail(ErrorCode::Structural, "behavior pattern width does not match the policy network");
  }
  const auto reconstruction = mlp::forward(mfnn, bh.values);
  double sum = 0.0;
  for (std::size_t i = 0; i < reconstruction.size(); ++i) sum += std::abs(bh.values[i] - reconstruction[i]);
  return sum / static_cast<double>(reconstruction.size());
}

double bootstrap_score(const BehaviorPattern& bh, const PatternHistory& history) {
  if (history.patterns.empty()) return 0.0;
  std::vector<double> mean(bh.values.size(), 0.0);
  for (const auto& p : history.patterns) {
    if (p.values.size() != mean.size()) fail(ErrorCode::Structural, "pattern history width is inconsistent");
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += p.values[i];
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    sum += std::abs(bh.values[i] - mean[i] / static_cast<double>(history.patterns.size()));
  }
  return sum / static_cast<double>(mean.size());
}

Evaluation evaluate(const BehaviorPattern& bh, const PatternHistory& history, const PolicyConfig& config,
                    const mlp::NetworkWeights* cached_net) {
  bh.validate();
  Evaluation ev;
  ev.report.node_id = history.node_id;
  ev.report.theta_used = config.theta;
  ev.report.history_len = history.patterns.size();
  if (history.patterns.size() >= config.min_history) {
    const mlp::NetworkWeights* net = cached_net;
    if (!net) {
      ev.trained_net = train_policy_net(history, config);
      net = &*ev.trained_net;
    }
    ev.report.score = deviation_score(*net, bh);
    ev.report.scored_by = ScoredBy::Neural;
  } else {
    ev.report.score = bootstrap_score(bh, history);
    ev.report.scored_by = ScoredBy::Bootstrap;
  }
  ev.report.decision = decide(ev.report.score, ev.report.theta_used);
  return ev;
}

OperationalMatrix conservative_om(const mlp::LayerSpec& spec, const GeneratorConfig& generator,
                                  const ActivityEncoder& encoder, std::string issuer, Timestamp issued_at) {
  if (!(spec == generator.layer_spec())) {
    fail(ErrorCode::Structural, "conservative OM requested for a shape other than the configured generator");
  }
  return OperationalMatrix{mlp::NetworkWeights::zeros(spec), issued_at, std::move(issuer), encoder.encoding_id()};
}

}  // namespace cogsec
