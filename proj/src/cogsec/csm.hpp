#pragma once

// Cognitive Security Manager: runs the admission / behavior analysis /
// revocation loop for each node event, applies administrator actions and
// keeps an event-sourced audit trail.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogsec/behavior.hpp"
#include "cogsec/policy.hpp"
#include "cogsec/repository.hpp"

namespace cogsec {

struct NodeEvent {
  PadlFingerprint padl;
  NodeActivity activity;
  Timestamp received_at = 0;
};

nlohmann::json to_json(const NodeEvent& event);
NodeEvent node_event_from_json(const nlohmann::json& doc);

enum class PathTaken {
  NewPending,
  NewAutoApproved,
  NewAutoDenied,
  AuthorizedNormal,
  AuthorizedRevoked,
  UnauthorizedBlocked,
};

const char* to_string(PathTaken path) noexcept;
PathTaken path_taken_from_string(const std::string& text);

struct EventOutcome {
  NodeId node_id;
  PathTaken path_taken = PathTaken::UnauthorizedBlocked;
  std::optional<DeviationReport> deviation;
  std::uint64_t audit_seq = 0;
};

nlohmann::json to_json(const EventOutcome& outcome);

enum class AdminActionKind { ApproveNew, DenyNew, SetTheta, OverrideRevoke, ReadmitNode, Recalibrate };

const char* to_string(AdminActionKind kind) noexcept;
AdminActionKind admin_action_kind_from_string(const std::string& text);

struct AdminAction {
  AdminActionKind kind = AdminActionKind::SetTheta;
  NodeId target;                 // node-scoped kinds
  std::optional<double> theta;   // SetTheta
  std::string actor;
  Timestamp issued_at = 0;
};

nlohmann::json to_json(const AdminAction& action);
AdminAction admin_action_from_json(const nlohmann::json& doc);

// How newly seen PADLs are admitted.
struct AdminRule {
  std::string attribute;
  std::string prefix;  // matched against the attribute's text form
  bool approve = true;
};

struct AdminPolicy {
  enum class Mode { Interactive, AutoApproveAll, AutoDenyAll, Scripted };
  Mode mode = Mode::AutoApproveAll;
  std::vector<AdminRule> rules;  // Scripted: first match wins, no match -> pending
};

nlohmann::json to_json(const AdminPolicy& policy);
AdminPolicy admin_policy_from_json(const nlohmann::json& doc);

struct AuditRecord {
  std::uint64_t seq = 0;
  Timestamp at = 0;
  std::string kind;  // "event" or "admin"
  std::string actor;
  NodeId node_id;
  std::string detail;  // path taken, or admin action kind
  std::optional<DeviationReport> deviation;
  std::optional<double> theta;  // theta in force after a SetTheta
  std::vector<Mutation> mutations;
};

nlohmann::json to_json(const AuditRecord& record);
AuditRecord audit_record_from_json(const nlohmann::json& doc);

// Reads an audit JSONL file; a torn final line is ignored, and removed from
// the file when `repair` is set.
std::vector<AuditRecord> read_audit_file(const std::filesystem::path& path, bool repair = false);

struct CsmConfig {
  GeneratorConfig generator;
  PolicyConfig policy;
  RepositoryOptions repository;
  AdminPolicy admin;
  std::size_t recent_activity_capacity = 16;  // windows kept for Recalibrate

  void validate() const;
};

nlohmann::json to_json(const CsmConfig& config);
CsmConfig csm_config_from_json(const nlohmann::json& doc);

struct PendingNode {
  PadlFingerprint padl;
  Timestamp first_seen = 0;
  Timestamp last_seen = 0;
  std::uint64_t sightings = 0;
};

struct NodeView {
  NodeRecord record;
  std::size_t history_len = 0;
  std::optional<DeviationReport> last_report;
};

nlohmann::json to_json(const PendingNode& node);
nlohmann::json to_json(const NodeView& view);

// Wall-clock time spent inside policy evaluation, by scoring path.
struct EvalStats {
  std::uint64_t cached_count = 0;
  double cached_ms = 0.0;
  std::uint64_t trained_count = 0;
  double trained_ms = 0.0;
  std::uint64_t bootstrap_count = 0;
  double bootstrap_ms = 0.0;

  std::uint64_t total_count() const { return cached_count + trained_count + bootstrap_count; }
  double mean_ms() const;
  double mean_cached_ms() const { return cached_count ? cached_ms / static_cast<double>(cached_count) : 0.0; }
};

struct ReplayResult {
  Repository repository;
  std::optional<double> theta;
  std::uint64_t last_seq = 0;
};

// Applies the mutations of every record in order to an empty repository.
// Throws Validation if sequence numbers are not strictly increasing.
ReplayResult replay_audit(std::span<const AuditRecord> records, RepositoryOptions options);

class Csm {
 public:
  explicit Csm(CsmConfig config);
  Csm(CsmConfig config, Repository repository);
  Csm(const Csm&) = delete;
  Csm& operator=(const Csm&) = delete;

  // Repository errors propagate and leave the event unconsumed: no state
  // change, no audit record.
  EventOutcome handle_event(const NodeEvent& event);
  AuditRecord apply_admin_action(const AdminAction& action);

  std::vector<AuditRecord> audit_log(std::uint64_t since_seq = 0) const;
  std::uint64_t last_audit_seq() const;

  // Rebuilds repository, theta and audit log from a recorded trail. Only
  // valid on a CSM that has not processed anything yet.
  void restore(std::span<const AuditRecord> records);
  // Every subsequent audit record is also appended (and fsynced) to `path`
  // as JSON lines.
  void attach_audit_file(const std::filesystem::path& path);

  std::vector<PendingNode> pending() const;
  std::vector<NodeView> nodes() const;
  std::optional<NodeView> node(const NodeId& id) const;
  double theta() const;
  EvalStats eval_stats() const;
  std::string snapshot_text() const;
  nlohmann::json snapshot() const;
  const CsmConfig& config() const { return config_; }
  const ActivityEncoder& encoder() const { return encoder_; }

  // Direct access for tests and the experiment harness; not synchronized.
  const Repository& repository_unsafe() const { return repo_; }

 private:
  enum class Admission { Approve, Deny, Pending };
  struct PolicyCache {
    mlp::NetworkWeights net;
    std::uint64_t trained_at = 0;  // appends counter when trained
  };

  Admission admission_for(const PadlFingerprint& padl) const;
  OperationalMatrix fresh_conservative_om(const std::string& issuer, Timestamp at) const;
  AuditRecord& record(AuditRecord rec);
  void forget_derived(const NodeId& id);
  void remember_activity(const NodeId& id, const NodeActivity& activity);

  mutable std::mutex mutex_;
  CsmConfig config_;
  ActivityEncoder encoder_;
  Repository repo_;
  std::vector<AuditRecord> audit_;
  std::uint64_t next_seq_ = 1;
  std::map<NodeId, PendingNode> pending_;
  std::map<NodeId, PolicyCache> cache_;
  std::map<NodeId, std::uint64_t> appends_;
  std::map<NodeId, std::vector<NodeActivity>> recent_;
  std::map<NodeId, DeviationReport> last_report_;
  EvalStats stats_;
  std::optional<Journal> audit_file_;
};

}  // namespace cogsec
