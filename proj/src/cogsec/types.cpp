#include "cogsec/types.hpp"

#include <cmath>

#include "cogsec/error.hpp"

namespace cogsec {

const char* to_string(NodeStatus status) noexcept {
  switch (status) {
    case NodeStatus::New: return "new";
    case NodeStatus::Authorized: return "authorized";
    case NodeStatus::Unauthorized: return "unauthorized";
  }
  return "unknown";
}

NodeStatus node_status_from_string(const std::string& text) {
  if (text == "new") return NodeStatus::New;
  if (text == "authorized") return NodeStatus::Authorized;
  if (text == "unauthorized") return NodeStatus::Unauthorized;
  fail(ErrorCode::Validation, "unknown node status '" + text + "'");
}

void BehaviorPattern::validate() const {
  if (values.empty()) fail(ErrorCode::Structural, "behavior pattern is empty");
  for (double v : values) {
    if (!(v > 0.0 && v < 1.0)) fail(ErrorCode::Validation, "behavior pattern component outside (0,1)");
  }
}

nlohmann::json to_json(const BehaviorPattern& bh) { return {{"values", bh.values}, {"produced_at", bh.produced_at}}; }

BehaviorPattern pattern_from_json(const nlohmann::json& doc) {
  BehaviorPattern bh;
  try {
    bh.values = doc.at("values").get<std::vector<double>>();
    bh.produced_at = doc.value("produced_at", Timestamp{0});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Validation, std::string("malformed behavior pattern: ") + e.what());
  }
  bh.validate();
  return bh;
}

nlohmann::json to_json(const OperationalMatrix& om) {
  return {{"generator_net", mlp::to_json(om.generator_net)},
          {"issued_at", om.issued_at},
          {"issuer", om.issuer},
          {"encoding_id", om.encoding_id}};
}

OperationalMatrix om_from_json(const nlohmann::json& doc) {
  OperationalMatrix om;
  try {
    om.generator_net = mlp::weights_from_json(doc.at("generator_net"));
    om.issued_at = doc.at("issued_at").get<Timestamp>();
    om.issuer = doc.at("issuer").get<std::string>();
    om.encoding_id = doc.at("encoding_id").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Structural, std::string("malformed operational matrix: ") + e.what());
  }
  return om;
}

nlohmann::json to_json(const NodeRecord& record) {
  return {{"node_id", record.node_id},
          {"padl", to_json(record.padl)},
          {"status", to_string(record.status)},
          {"admitted_at", record.admitted_at}};
}

NodeRecord node_record_from_json(const nlohmann::json& doc) {
  NodeRecord record;
  try {
    record.node_id = doc.at("node_id").get<std::string>();
    record.padl = padl_from_json(doc.at("padl"));
    record.status = node_status_from_string(doc.at("status").get<std::string>());
    record.admitted_at = doc.at("admitted_at").get<Timestamp>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Structural, std::string("malformed node record: ") + e.what());
  }
  if (record.node_id != record.padl.digest()) fail(ErrorCode::Structural, "node id does not match its PADL digest");
  return record;
}

}  // namespace cogsec
