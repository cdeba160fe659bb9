#pragma once

// Domain values shared by the repositories, the behavior generator and the
// policy engine.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogsec/mlp.hpp"
#include "cogsec/padl.hpp"

namespace cogsec {

// Milliseconds on the simulation (or deployment) clock.
using Timestamp = std::int64_t;

// Node identifiers are PADL digests.
using NodeId = std::string;

enum class NodeStatus { New, Authorized, Unauthorized };

const char* to_string(NodeStatus status) noexcept;
NodeStatus node_status_from_string(const std::string& text);

struct BehaviorPattern {
  std::vector<double> values;  // each strictly inside (0, 1)
  Timestamp produced_at = 0;

  void validate() const;
  bool operator==(const BehaviorPattern&) const = default;
};

// Per-node generator weights (OM_i). `encoding_id` names the feature order
// and normalization table the weights were trained against.
struct OperationalMatrix {
  mlp::NetworkWeights generator_net;
  Timestamp issued_at = 0;
  std::string issuer;
  std::string encoding_id;

  bool operator==(const OperationalMatrix&) const = default;
};

struct NodeRecord {
  NodeId node_id;
  PadlFingerprint padl;
  NodeStatus status = NodeStatus::Authorized;
  Timestamp admitted_at = 0;
};

nlohmann::json to_json(const BehaviorPattern& bh);
BehaviorPattern pattern_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const OperationalMatrix& om);
OperationalMatrix om_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const NodeRecord& record);
NodeRecord node_record_from_json(const nlohmann::json& doc);

}  // namespace cogsec
