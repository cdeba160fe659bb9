#pragma once

// The CSM's stores: the PADL repository (registered and unregistered
// sections), the operational matrices repository and the behavior pattern
// repository. Every state change is a Mutation; with a journal attached the
// mutation is made durable before it becomes visible.

#include <cstddef>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogsec/types.hpp"

namespace cogsec {

namespace mutation {

// New node enters the registered section with its first OM and an empty history.
struct Register {
  PadlFingerprint padl;
  OperationalMatrix om;
  Timestamp at = 0;
};

// New node placed directly in the unregistered section.
struct Deny {
  PadlFingerprint padl;
  Timestamp at = 0;
};

// Purge OM and history, move the PADL registered -> unregistered.
struct Revoke {
  NodeId node_id;
};

// Move the PADL unregistered -> registered with a fresh OM and empty history.
struct Readmit {
  NodeId node_id;
  OperationalMatrix om;
  Timestamp at = 0;
};

struct PutOm {
  NodeId node_id;
  OperationalMatrix om;
  bool reset_history = false;
};

struct AppendPattern {
  NodeId node_id;
  BehaviorPattern pattern;
};

}  // namespace mutation

using Mutation = std::variant<mutation::Register, mutation::Deny, mutation::Revoke, mutation::Readmit,
                              mutation::PutOm, mutation::AppendPattern>;

nlohmann::json to_json(const Mutation& m);
Mutation mutation_from_json(const nlohmann::json& doc);
NodeId mutation_target(const Mutation& m);

struct PatternHistory {
  NodeId node_id;
  std::size_t capacity = 0;
  std::vector<BehaviorPattern> patterns;  // oldest first
};

// Append-only line journal. Each committed entry is one JSON document
// followed by '\n'; an entry without its newline or that fails to parse is a
// torn write and is discarded on recovery.
class Journal {
 public:
  explicit Journal(std::filesystem::path path);

  void append(const nlohmann::json& entry);
  void reset();
  const std::filesystem::path& path() const { return path_; }

  // Fault injection: the next append writes at most `bytes` bytes and then
  // fails as if the process died mid-write.
  void crash_after_bytes(std::size_t bytes) { crash_after_ = bytes; }

  // Reads committed entries and, unless told otherwise, truncates any torn
  // tail from the file.
  static std::vector<nlohmann::json> recover(const std::filesystem::path& path, bool truncate_torn_tail = true);

 private:
  std::filesystem::path path_;
  std::optional<std::size_t> crash_after_;
};

struct RepositoryOptions {
  std::size_t history_capacity = 256;
};

class Repository {
 public:
  explicit Repository(RepositoryOptions options = {});

  // Loads `dir/snapshot.json` (if present), replays `dir/journal.jsonl` and
  // keeps the journal attached for subsequent commits.
  static Repository open(const std::filesystem::path& dir, RepositoryOptions options = {});
  static Repository from_snapshot(const nlohmann::json& doc);

  NodeStatus classify_padl(const PadlFingerprint& padl) const;
  NodeStatus classify_padl_id(const NodeId& id) const;

  NodeRecord register_node(const PadlFingerprint& padl, OperationalMatrix om, Timestamp at);
  void deny_node(const PadlFingerprint& padl, Timestamp at);
  void revoke_node(const NodeId& id);
  void readmit_node(const NodeId& id, OperationalMatrix om, Timestamp at);

  OperationalMatrix get_om(const NodeId& id) const;
  void put_om(const NodeId& id, OperationalMatrix om, bool reset_history = false);

  void append_pattern(const NodeId& id, BehaviorPattern bh);
  PatternHistory training_set(const NodeId& id) const;

  // Validates, journals, then applies. Throws without changing state if the
  // mutation is not applicable or cannot be made durable.
  void commit(const Mutation& m);
  // Throws the error `commit` would raise, without side effects.
  void check_applicable(const Mutation& m) const;

  const NodeRecord* find(const NodeId& id) const;
  std::vector<NodeRecord> nodes() const;
  std::size_t registered_count() const { return registered_.size(); }
  std::size_t unregistered_count() const { return unregistered_.size(); }
  std::size_t history_capacity() const { return options_.history_capacity; }
  bool has_om(const NodeId& id) const { return oms_.contains(id); }
  bool has_history(const NodeId& id) const { return histories_.contains(id); }

  // Throws Validation describing the first violated store invariant.
  void check_invariants() const;

  nlohmann::json snapshot() const;
  // Canonical text form of snapshot(); byte-equal for equal states.
  std::string snapshot_text() const;
  void save_snapshot(const std::filesystem::path& file) const;

  // Writes the snapshot next to the journal and empties the journal.
  void checkpoint();
  Journal* journal() { return journal_ ? &*journal_ : nullptr; }

 private:
  void apply(const Mutation& m);
  const NodeRecord& registered_or_throw(const NodeId& id) const;

  RepositoryOptions options_;
  std::map<NodeId, NodeRecord> registered_;
  std::map<NodeId, NodeRecord> unregistered_;
  std::map<NodeId, OperationalMatrix> oms_;
  std::map<NodeId, std::deque<BehaviorPattern>> histories_;
  std::optional<Journal> journal_;
  std::filesystem::path dir_;
};

// Writes `contents` to a sibling temp file and renames it over `file`.
void write_file_atomic(const std::filesystem::path& file, const std::string& contents);

}  // namespace cogsec
