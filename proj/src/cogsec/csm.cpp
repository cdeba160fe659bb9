#include "cogsec/csm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "cogsec/error.hpp"

namespace cogsec {

namespace {

constexpr const char* kAutoPolicyIssuer = "auto-policy";

std::string attribute_text(const AttributeValue& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(value));
  return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const NodeEvent& e) {
  return {{"padl", to_json(e.padl)}, {"activity", to_json(e.activity)}, {"received_at", e.received_at}};
}

NodeEvent node_event_from_json(const nlohmann::json& doc) {
  NodeEvent e;
  try {
    e.padl = padl_from_json(doc.at("padl"));
    e.activity = activity_from_json(doc.at("activity"));
    e.received_at = doc.value("received_at", e.activity.window_end);
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::Validation, std::string("malformed node event: ") + ex.what());
  }
  if (e.activity.node_id.empty()) e.activity.node_id = e.padl.digest();
  return e;
}

const char* to_string(PathTaken path) noexcept {
  switch (path) {
    case PathTaken::NewPending: return "new_pending";
    case PathTaken::NewAutoApproved: return "new_auto_approved";
    case PathTaken::NewAutoDenied: return "new_auto_denied";
    case PathTaken::AuthorizedNormal: return "authorized_normal";
    case PathTaken::AuthorizedRevoked: return "authorized_revoked";
    case PathTaken::UnauthorizedBlocked: return "unauthorized_blocked";
  }
  return "unknown";
}

PathTaken path_taken_from_string(const std::string& text) {
  for (auto p : {PathTaken::NewPending, PathTaken::NewAutoApproved, PathTaken::NewAutoDenied,
                 PathTaken::AuthorizedNormal, PathTaken::AuthorizedRevoked, PathTaken::UnauthorizedBlocked}) {
    if (text == to_string(p)) return p;
  }
  fail(ErrorCode::Validation, "unknown path '" + text + "'");
}

nlohmann::json to_json(const EventOutcome& o) {
  nlohmann::json doc = {{"node_id", o.node_id}, {"path_taken", to_string(o.path_taken)}, {"audit_seq", o.audit_seq}};
  doc["deviation"] = o.deviation ? to_json(*o.deviation) : nlohmann::json();
  return doc;
}

const char* to_string(AdminActionKind kind) noexcept {
  switch (kind) {
    case AdminActionKind::ApproveNew: return "approve_new";
    case AdminActionKind::DenyNew: return "deny_new";
    case AdminActionKind::SetTheta: return "set_theta";
    case AdminActionKind::OverrideRevoke: return "override_revoke";
    case AdminActionKind::ReadmitNode: return "readmit_node";
    case AdminActionKind::Recalibrate: return "recalibrate";
  }
  return "unknown";
}

AdminActionKind admin_action_kind_from_string(const std::string& text) {
  for (auto k : {AdminActionKind::ApproveNew, AdminActionKind::DenyNew, AdminActionKind::SetTheta,
                 AdminActionKind::OverrideRevoke, AdminActionKind::ReadmitNode, AdminActionKind::Recalibrate}) {
    if (text == to_string(k)) return k;
  }
  fail(ErrorCode::Validation, "unknown admin action '" + text + "'");
}

nlohmann::json to_json(const AdminAction& a) {
  nlohmann::json doc = {{"kind", to_string(a.kind)}, {"target", a.target}, {"actor", a.actor}, {"issued_at", a.issued_at}};
  if (a.theta) doc["theta"] = *a.theta;
  return doc;
}

AdminAction admin_action_from_json(const nlohmann::json& doc) {
  AdminAction a;
  try {
    a.kind = admin_action_kind_from_string(doc.at("kind").get<std::string>());
    a.target = doc.value("target", std::string{});
    a.actor = doc.value("actor", std::string{"admin"});
    a.issued_at = doc.value("issued_at", Timestamp{0});
    if (doc.contains("theta") && !doc["theta"].is_null()) a.theta = doc["theta"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Validation, std::string("malformed admin action: ") + e.what());
  }
  return a;
}

nlohmann::json to_json(const AdminPolicy& policy) {
  const char* mode = "auto_approve_all";
  switch (policy.mode) {
    case AdminPolicy::Mode::Interactive: mode = "interactive"; break;
    case AdminPolicy::Mode::AutoApproveAll: mode = "auto_approve_all"; break;
    case AdminPolicy::Mode::AutoDenyAll: mode = "auto_deny_all"; break;
    case AdminPolicy::Mode::Scripted: mode = "scripted"; break;
  }
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : policy.rules) {
    rules.push_back({{"attribute", r.attribute}, {"prefix", r.prefix}, {"decision", r.approve ? "approve" : "deny"}});
  }
  return {{"mode", mode}, {"rules", rules}};
}

AdminPolicy admin_policy_from_json(const nlohmann::json& doc) {
  AdminPolicy policy;
  try {
    const std::string mode = doc.value("mode", std::string{"auto_approve_all"});
    if (mode == "interactive") {
      policy.mode = AdminPolicy::Mode::Interactive;
    } else if (mode == "auto_approve_all") {
      policy.mode = AdminPolicy::Mode::AutoApproveAll;
    } else if (mode == "auto_deny_all") {
      policy.mode = AdminPolicy::Mode::AutoDenyAll;
    } else if (mode == "scripted") {
      policy.mode = AdminPolicy::Mode::Scripted;
    } else {
      fail(ErrorCode::Config, "unknown admin mode '" + mode + "'");
    }
    for (const auto& r : doc.value("rules", nlohmann::json::array())) {
      const std::string decision = r.at("decision").get<std::string>();
      if (decision != "approve" && decision != "deny") fail(ErrorCode::Config, "rule decision must be approve or deny");
      policy.rules.push_back({r.at("attribute").get<std::string>(), r.value("prefix", std::string{}),
                              decision == "approve"});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("malformed admin section: ") + e.what());
  }
  return policy;
}

nlohmann::json to_json(const AuditRecord& r) {
  nlohmann::json mutations = nlohmann::json::array();
  for (const auto& m : r.mutations) mutations.push_back(to_json(m));
  nlohmann::json doc = {{"seq", r.seq},       {"at", r.at},         {"kind", r.kind},
                        {"actor", r.actor},   {"node_id", r.node_id}, {"detail", r.detail},
                        {"mutations", std::move(mutations)}};
  doc["deviation"] = r.deviation ? to_json(*r.deviation) : nlohmann::json();
  doc["theta"] = r.theta ? nlohmann::json(*r.theta) : nlohmann::json();
  return doc;
}

AuditRecord audit_record_from_json(const nlohmann::json& doc) {
  AuditRecord r;
  try {
    r.seq = doc.at("seq").get<std::uint64_t>();
    r.at = doc.at("at").get<Timestamp>();
    r.kind = doc.at("kind").get<std::string>();
    r.actor = doc.value("actor", std::string{});
    r.node_id = doc.value("node_id", std::string{});
    r.detail = doc.value("detail", std::string{});
    if (doc.contains("deviation") && !doc["deviation"].is_null()) {
      r.deviation = deviation_report_from_json(doc["deviation"]);
    }
    if (doc.contains("theta") && !doc["theta"].is_null()) r.theta = doc["theta"].get<double>();
    for (const auto& m : doc.at("mutations")) r.mutations.push_back(mutation_from_json(m));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Validation, std::string("malformed audit record: ") + e.what());
  }
  return r;
}

void CsmConfig::validate() const {
  generator.validate();
  policy.validate(generator.pattern_dim);
  if (repository.history_capacity < 1) fail(ErrorCode::Config, "history capacity must be at least 1");
  if (recent_activity_capacity < 1) fail(ErrorCode::Config, "recent_activity_capacity must be at least 1");
}

nlohmann::json to_json(const CsmConfig& c) {
  return {{"generator", to_json(c.generator)},
          {"policy", to_json(c.policy)},
          {"repository", {{"history_capacity", c.repository.history_capacity}}},
          {"admin", to_json(c.admin)},
          {"recent_activity_capacity", c.recent_activity_capacity}};
}

CsmConfig csm_config_from_json(const nlohmann::json& doc) {
  CsmConfig c;
  try {
    if (doc.contains("generator")) c.generator = generator_config_from_json(doc.at("generator"));
    if (doc.contains("policy")) c.policy = policy_config_from_json(doc.at("policy"));
    if (doc.contains("repository")) {
      c.repository.history_capacity = doc.at("repository").value("history_capacity", c.repository.history_capacity);
    }
    if (doc.contains("admin")) c.admin = admin_policy_from_json(doc.at("admin"));
    c.recent_activity_capacity = doc.value("recent_activity_capacity", c.recent_activity_capacity);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("malformed configuration: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const PendingNode& node) {
  return {{"node_id", node.padl.digest()},
          {"padl", to_json(node.padl)},
          {"first_seen", node.first_seen},
          {"last_seen", node.last_seen},
          {"sightings", node.sightings}};
}

nlohmann::json to_json(const NodeView& view) {
  nlohmann::json doc = to_json(view.record);
  doc["history_len"] = view.history_len;
  doc["last_report"] = view.last_report ? to_json(*view.last_report) : nlohmann::json();
  return doc;
}

double EvalStats::mean_ms() const {
  const auto n = total_count();
  return n ? (cached_ms + trained_ms + bootstrap_ms) / static_cast<double>(n) : 0.0;
}

std::vector<AuditRecord> read_audit_file(const std::filesystem::path& path, bool repair) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::NotFound, "audit file " + path.string() + " does not exist");
  std::vector<AuditRecord> out;
  for (const auto& doc : Journal::recover(path, repair)) out.push_back(audit_record_from_json(doc));
  return out;
}

ReplayResult replay_audit(std::span<const AuditRecord> records, RepositoryOptions options) {
  ReplayResult result{Repository(options), std::nullopt, 0};
  for (const auto& rec : records) {
    if (rec.seq <= result.last_seq) fail(ErrorCode::Validation, "audit sequence is not strictly increasing");
    for (const auto& m : rec.mutations) result.repository.commit(m);
    if (rec.theta) result.theta = rec.theta;
    result.last_seq = rec.seq;
  }
  result.repository.check_invariants();
  return result;
}

// ---------------------------------------------------------------------------
// Csm

Csm::Csm(CsmConfig config) : Csm(config, Repository(config.repository)) {}

Csm::Csm(CsmConfig config, Repository repository)
    : config_(std::move(config)), encoder_(config_.generator), repo_(std::move(repository)) {
  config_.validate();
}

Csm::Admission Csm::admission_for(const PadlFingerprint& padl) const {
  switch (config_.admin.mode) {
    case AdminPolicy::Mode::Interactive: return Admission::Pending;
    case AdminPolicy::Mode::AutoApproveAll: return Admission::Approve;
    case AdminPolicy::Mode::AutoDenyAll: return Admission::Deny;
    case AdminPolicy::Mode::Scripted:
      for (const auto& rule : config_.admin.rules) {
        const AttributeValue* value = padl.find(rule.attribute);
        if (value && attribute_text(*value).starts_with(rule.prefix)) {
          return rule.approve ? Admission::Approve : Admission::Deny;
        }
      }
      return Admission::Pending;
  }
  return Admission::Pending;
}

OperationalMatrix Csm::fresh_conservative_om(const std::string& issuer, Timestamp at) const {
  return conservative_om(config_.generator.layer_spec(), config_.generator, encoder_, issuer, at);
}

AuditRecord& Csm::record(AuditRecord rec) {
  rec.seq = next_seq_++;
  audit_.push_back(std::move(rec));
  if (audit_file_) audit_file_->append(to_json(audit_.back()));
  return audit_.back();
}

void Csm::forget_derived(const NodeId& id) {
  cache_.erase(id);
  appends_.erase(id);
  recent_.erase(id);
}

void Csm::remember_activity(const NodeId& id, const NodeActivity& activity) {
  auto& window = recent_[id];
  window.push_back(activity);
  if (window.size() > config_.recent_activity_capacity) window.erase(window.begin());
}

EventOutcome Csm::handle_event(const NodeEvent& event) {
  std::lock_guard lock(mutex_);
  event.activity.validate();
  const NodeId id = event.padl.digest();
  if (!event.activity.node_id.empty() && event.activity.node_id != id) {
    fail(ErrorCode::Validation, "activity node id does not match the PADL digest");
  }

  AuditRecord rec;
  rec.at = event.received_at;
  rec.kind = "event";
  rec.actor = "csm";
  rec.node_id = id;

  EventOutcome outcome;
  outcome.node_id = id;

  switch (repo_.classify_padl(event.padl)) {
    case NodeStatus::New: {
      if (auto it = pending_.find(id); it != pending_.end()) {
        it->second.last_seen = event.received_at;
        ++it->second.sightings;
        outcome.path_taken = PathTaken::NewPending;
        break;
      }
      switch (admission_for(event.padl)) {
        case Admission::Approve: {
          Mutation m = mutation::Register{event.padl, fresh_conservative_om(kAutoPolicyIssuer, event.received_at),
                                          event.received_at};
          repo_.commit(m);
          rec.mutations.push_back(std::move(m));
          remember_activity(id, event.activity);
          outcome.path_taken = PathTaken::NewAutoApproved;
          break;
        }
        case Admission::Deny: {
          Mutation m = mutation::Deny{event.padl, event.received_at};
          repo_.commit(m);
          rec.mutations.push_back(std::move(m));
          outcome.path_taken = PathTaken::NewAutoDenied;
          break;
        }
        case Admission::Pending:
          pending_.emplace(id, PendingNode{event.padl, event.received_at, event.received_at, 1});
          outcome.path_taken = PathTaken::NewPending;
          break;
      }
      break;
    }
    case NodeStatus::Authorized: {
      const OperationalMatrix om = repo_.get_om(id);
      const BehaviorPattern bh = generate_pattern(om, event.activity, encoder_);
      const PatternHistory history = repo_.training_set(id);

      const std::uint64_t appended = appends_[id];
      const mlp::NetworkWeights* cached = nullptr;
      if (auto it = cache_.find(id);
          it != cache_.end() && appended - it->second.trained_at < config_.policy.min_history) {
        cached = &it->second.net;
      }

      const auto t0 = std::chrono::steady_clock::now();
      Evaluation ev = evaluate(bh, history, config_.policy, cached);
      const double ms = elapsed_ms(t0);
      if (ev.report.scored_by == ScoredBy::Bootstrap) {
        ++stats_.bootstrap_count;
        stats_.bootstrap_ms += ms;
      } else if (cached) {
        ++stats_.cached_count;
        stats_.cached_ms += ms;
      } else {
        ++stats_.trained_count;
        stats_.trained_ms += ms;
      }

      if (ev.report.decision == Decision::Normal) {
        Mutation m = mutation::AppendPattern{id, bh};
        repo_.commit(m);
        rec.mutations.push_back(std::move(m));
        if (ev.trained_net) cache_[id] = PolicyCache{std::move(*ev.trained_net), appended};
        appends_[id] = appended + 1;
        remember_activity(id, event.activity);
        outcome.path_taken = PathTaken::AuthorizedNormal;
      } else {
        Mutation m = mutation::Revoke{id};
        repo_.commit(m);
        rec.mutations.push_back(std::move(m));
        forget_derived(id);
        outcome.path_taken = PathTaken::AuthorizedRevoked;
      }
      last_report_[id] = ev.report;
      outcome.deviation = ev.report;
      rec.deviation = ev.report;
      break;
    }
    case NodeStatus::Unauthorized:
      outcome.path_taken = PathTaken::UnauthorizedBlocked;
      break;
  }

  rec.detail = to_string(outcome.path_taken);
  outcome.audit_seq = record(std::move(rec)).seq;
  return outcome;
}

AuditRecord Csm::apply_admin_action(const AdminAction& action) {
  std::lock_guard lock(mutex_);
  AuditRecord rec;
  rec.at = action.issued_at;
  rec.kind = "admin";
  rec.actor = action.actor.empty() ? "admin" : action.actor;
  rec.node_id = action.target;
  rec.detail = to_string(action.kind);

  auto commit = [&](Mutation m) {
    repo_.commit(m);
    rec.mutations.push_back(std::move(m));
  };

  switch (action.kind) {
    case AdminActionKind::ApproveNew:
    case AdminActionKind::DenyNew: {
      auto it = pending_.find(action.target);
      if (it == pending_.end()) fail(ErrorCode::NotFound, "no pending node " + action.target);
      if (action.kind == AdminActionKind::ApproveNew) {
        commit(mutation::Register{it->second.padl, fresh_conservative_om(rec.actor, action.issued_at), action.issued_at});
      } else {
        commit(mutation::Deny{it->second.padl, action.issued_at});
      }
      pending_.erase(it);
      break;
    }
    case AdminActionKind::SetTheta: {
      if (!action.theta || !(*action.theta > 0.0 && *action.theta < 1.0)) {
        fail(ErrorCode::Validation, "theta must lie in (0, 1)");
      }
      config_.policy.theta = *action.theta;
      rec.theta = *action.theta;
      break;
    }
    case AdminActionKind::OverrideRevoke: {
      if (repo_.classify_padl_id(action.target) != NodeStatus::Authorized) {
        fail(ErrorCode::NotFound, "node " + action.target + " is not registered");
      }
      commit(mutation::Revoke{action.target});
      forget_derived(action.target);
      break;
    }
    case AdminActionKind::ReadmitNode: {
      const NodeStatus status = repo_.classify_padl_id(action.target);
      if (status == NodeStatus::New) fail(ErrorCode::NotFound, "node " + action.target + " is unknown");
      if (status == NodeStatus::Authorized) fail(ErrorCode::Validation, "node " + action.target + " is already registered");
      commit(mutation::Readmit{action.target, fresh_conservative_om(rec.actor, action.issued_at), action.issued_at});
      forget_derived(action.target);
      last_report_.erase(action.target);
      break;
    }
    case AdminActionKind::Recalibrate: {
      if (repo_.classify_padl_id(action.target) != NodeStatus::Authorized) {
        fail(ErrorCode::NotFound, "node " + action.target + " is not registered");
      }
      auto it = recent_.find(action.target);
      if (it == recent_.end() || it->second.empty()) {
        fail(ErrorCode::Validation, "node " + action.target + " has no recent activity to calibrate from");
      }
      const auto windows = widen_calibration(it->second, config_.generator.calibration_copies,
                                             config_.generator.calibration_spread, config_.generator.training.seed);
      std::vector<std::vector<double>> targets;
      for (const auto& a : windows) {
        auto t = profile_targets(a, encoder_.norms());
        t.resize(config_.generator.pattern_dim, 0.5);
        targets.push_back(std::move(t));
      }
      OperationalMatrix om = calibrate_om(windows, targets, config_.generator.training,
                                          config_.generator.layer_spec(), encoder_, rec.actor, action.issued_at);
      commit(mutation::PutOm{action.target, std::move(om), true});
      cache_.erase(action.target);
      appends_.erase(action.target);
      break;
    }
  }
  return record(std::move(rec));
}

std::vector<AuditRecord> Csm::audit_log(std::uint64_t since_seq) const {
  std::lock_guard lock(mutex_);
  std::vector<AuditRecord> out;
  for (const auto& r : audit_) {
    if (r.seq > since_seq) out.push_back(r);
  }
  return out;
}

std::uint64_t Csm::last_audit_seq() const {
  std::lock_guard lock(mutex_);
  return next_seq_ - 1;
}

void Csm::restore(std::span<const AuditRecord> records) {
  std::lock_guard lock(mutex_);
  if (!audit_.empty()) fail(ErrorCode::Validation, "restore requires a fresh CSM");
  ReplayResult replayed = replay_audit(records, config_.repository);
  repo_ = std::move(replayed.repository);
  if (replayed.theta) config_.policy.theta = *replayed.theta;
  audit_.assign(records.begin(), records.end());
  next_seq_ = replayed.last_seq + 1;
  for (const auto& r : audit_) {
    if (r.deviation && repo_.find(r.node_id)) last_report_[r.node_id] = *r.deviation;
  }
}

void Csm::attach_audit_file(const std::filesystem::path& path) {
  std::lock_guard lock(mutex_);
  audit_file_.emplace(path);
}

std::vector<PendingNode> Csm::pending() const {
  std::lock_guard lock(mutex_);
  std::vector<PendingNode> out;
  for (const auto& [_, p] : pending_) out.push_back(p);
  return out;
}

std::vector<NodeView> Csm::nodes() const {
  std::lock_guard lock(mutex_);
  std::vector<NodeView> out;
  for (auto& rec : repo_.nodes()) {
    NodeView view{rec, 0, std::nullopt};
    if (rec.status == NodeStatus::Authorized) view.history_len = repo_.training_set(rec.node_id).patterns.size();
    if (auto it = last_report_.find(rec.node_id); it != last_report_.end()) view.last_report = it->second;
    out.push_back(std::move(view));
  }
  return out;
}

std::optional<NodeView> Csm::node(const NodeId& id) const {
  std::lock_guard lock(mutex_);
  const NodeRecord* rec = repo_.find(id);
  if (!rec) return std::nullopt;
  NodeView view{*rec, 0, std::nullopt};
  if (rec->status == NodeStatus::Authorized) view.history_len = repo_.training_set(id).patterns.size();
  if (auto it = last_report_.find(id); it != last_report_.end()) view.last_report = it->second;
  return view;
}

double Csm::theta() const {
  std::lock_guard lock(mutex_);
  return config_.policy.theta;
}

EvalStats Csm::eval_stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

std::string Csm::snapshot_text() const {
  std::lock_guard lock(mutex_);
  return repo_.snapshot_text();
}

nlohmann::json Csm::snapshot() const {
  std::lock_guard lock(mutex_);
  return repo_.snapshot();
}

}  // namespace cogsec
