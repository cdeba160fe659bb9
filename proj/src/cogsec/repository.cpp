#include "cogsec/repository.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <sstream>

#include "cogsec/error.hpp"

namespace cogsec {

namespace {

constexpr int kSnapshotVersion = 1;
constexpr const char* kSnapshotFile = "snapshot.json";
constexpr const char* kJournalFile = "journal.jsonl";

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void io_fail(const std::string& what) {
  fail(ErrorCode::Persistence, what + ": " + std::strerror(errno));
}

void write_all(int fd, const char* data, std::size_t len, const std::string& what) {
  while (len > 0) {
    const ssize_t n = ::write(fd, data, len);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail(what);
    }
    data += n;
    len -= static_cast<std::size_t>(n);
  }
}

}  // namespace

nlohmann::json to_json(const Mutation& m) {
  return std::visit(
      overloaded{
          [](const mutation::Register& r) -> nlohmann::json {
            return {{"op", "register"}, {"padl", to_json(r.padl)}, {"om", to_json(r.om)}, {"at", r.at}};
          },
          [](const mutation::Deny& d) -> nlohmann::json {
            return {{"op", "deny"}, {"padl", to_json(d.padl)}, {"at", d.at}};
          },
          [](const mutation::Revoke& r) -> nlohmann::json { return {{"op", "revoke"}, {"node_id", r.node_id}}; },
          [](const mutation::Readmit& r) -> nlohmann::json {
            return {{"op", "readmit"}, {"node_id", r.node_id}, {"om", to_json(r.om)}, {"at", r.at}};
          },
          [](const mutation::PutOm& p) -> nlohmann::json {
            return {{"op", "put_om"}, {"node_id", p.node_id}, {"om", to_json(p.om)}, {"reset_history", p.reset_history}};
          },
          [](const mutation::AppendPattern& a) -> nlohmann::json {
            return {{"op", "append_pattern"}, {"node_id", a.node_id}, {"pattern", to_json(a.pattern)}};
          },
      },
      m);
}

Mutation mutation_from_json(const nlohmann::json& doc) {
  try {
    const std::string op = doc.at("op").get<std::string>();
    if (op == "register") {
      return mutation::Register{padl_from_json(doc.at("padl")), om_from_json(doc.at("om")), doc.at("at").get<Timestamp>()};
    }
    if (op == "deny") return mutation::Deny{padl_from_json(doc.at("padl")), doc.at("at").get<Timestamp>()};
    if (op == "revoke") return mutation::Revoke{doc.at("node_id").get<std::string>()};
    if (op == "readmit") {
      return mutation::Readmit{doc.at("node_id").get<std::string>(), om_from_json(doc.at("om")),
                               doc.at("at").get<Timestamp>()};
    }
    if (op == "put_om") {
      return mutation::PutOm{doc.at("node_id").get<std::string>(), om_from_json(doc.at("om")),
                             doc.value("reset_history", false)};
    }
    if (op == "append_pattern") {
      return mutation::AppendPattern{doc.at("node_id").get<std::string>(), pattern_from_json(doc.at("pattern"))};
    }
    fail(ErrorCode::Structural, "unknown mutation op '" + op + "'");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Structural, std::string("malformed mutation: ") + e.what());
  }
}

NodeId mutation_target(const Mutation& m) {
  return std::visit(overloaded{
                        [](const mutation::Register& r) { return r.padl.digest(); },
                        [](const mutation::Deny& d) { return d.padl.digest(); },
                        [](const auto& other) { return other.node_id; },
                    },
                    m);
}

// ---------------------------------------------------------------------------
// Journal

Journal::Journal(std::filesystem::path path) : path_(std::move(path)) {}

void Journal::append(const nlohmann::json& entry) {
  const std::string line = entry.dump() + '\n';
  const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) io_fail("cannot open journal " + path_.string());
  std::size_t len = line.size();
  const bool crash = crash_after_.has_value();
  if (crash) len = std::min(len, *crash_after_);
  crash_after_.reset();
  try {
    write_all(fd, line.data(), len, "journal write");
    if (!crash && ::fsync(fd) != 0) io_fail("journal fsync");
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  if (crash) fail(ErrorCode::Persistence, "injected crash after " + std::to_string(len) + " journal bytes");
}

void Journal::reset() {
  const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_fail("cannot truncate journal " + path_.string());
  ::fsync(fd);
  ::close(fd);
}

std::vector<nlohmann::json> Journal::recover(const std::filesystem::path& path, bool truncate_torn_tail) {
  std::vector<nlohmann::json> entries;
  std::ifstream in(path, std::ios::binary);
  if (!in) return entries;
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  in.close();

  std::size_t committed = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) break;
    auto doc = nlohmann::json::parse(text.begin() + static_cast<std::ptrdiff_t>(pos),
                                     text.begin() + static_cast<std::ptrdiff_t>(nl), nullptr, false);
    if (doc.is_discarded()) break;
    entries.push_back(std::move(doc));
    pos = nl + 1;
    committed = pos;
  }
  if (truncate_torn_tail && committed != text.size()) {
    std::error_code ec;
    std::filesystem::resize_file(path, committed, ec);
    if (ec) fail(ErrorCode::Persistence, "cannot truncate torn journal tail: " + ec.message());
  }
  return entries;
}

void write_file_atomic(const std::filesystem::path& file, const std::string& contents) {
  std::filesystem::path tmp = file;
  tmp += ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_fail("cannot create " + tmp.string());
  try {
    write_all(fd, contents.data(), contents.size(), "write " + tmp.string());
    if (::fsync(fd) != 0) io_fail("fsync " + tmp.string());
  } catch (...) {
    ::close(fd);
    std::filesystem::remove(tmp);
    throw;
  }
  ::close(fd);
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec) fail(ErrorCode::Persistence, "cannot rename " + tmp.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Repository

Repository::Repository(RepositoryOptions options) : options_(options) {
  if (options_.history_capacity == 0) fail(ErrorCode::Config, "history capacity must be at least 1");
}

Repository Repository::open(const std::filesystem::path& dir, RepositoryOptions options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Persistence, "cannot create repository directory: " + ec.message());

  Repository repo(options);
  const auto snap = dir / kSnapshotFile;
  if (std::filesystem::exists(snap)) {
    std::ifstream in(snap);
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) fail(ErrorCode::Persistence, "snapshot " + snap.string() + " is not valid JSON");
    repo = from_snapshot(doc);
  }
  for (const auto& entry : Journal::recover(dir / kJournalFile)) {
    repo.apply(mutation_from_json(entry.at("mutation")));
  }
  repo.dir_ = dir;
  repo.journal_.emplace(dir / kJournalFile);
  repo.check_invariants();
  return repo;
}

Repository Repository::from_snapshot(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "cogsec.repository") {
      fail(ErrorCode::Structural, "not a cogsec.repository snapshot");
    }
    if (doc.at("version").get<int>() != kSnapshotVersion) fail(ErrorCode::Structural, "unsupported snapshot version");
    Repository repo(RepositoryOptions{doc.at("history_capacity").get<std::size_t>()});
    for (const auto& r : doc.at("registered")) {
      auto rec = node_record_from_json(r);
      repo.registered_.emplace(rec.node_id, std::move(rec));
    }
    for (const auto& r : doc.at("unregistered")) {
      auto rec = node_record_from_json(r);
      repo.unregistered_.emplace(rec.node_id, std::move(rec));
    }
    for (const auto& [id, om] : doc.at("operational_matrices").items()) repo.oms_.emplace(id, om_from_json(om));
    for (const auto& [id, patterns] : doc.at("behavior_patterns").items()) {
      auto& hist = repo.histories_[id];
      for (const auto& p : patterns) hist.push_back(pattern_from_json(p));
    }
    repo.check_invariants();
    return repo;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Structural, std::string("malformed repository snapshot: ") + e.what());
  }
}

NodeStatus Repository::classify_padl(const PadlFingerprint& padl) const { return classify_padl_id(padl.digest()); }

NodeStatus Repository::classify_padl_id(const NodeId& id) const {
  if (registered_.contains(id)) return NodeStatus::Authorized;
  if (unregistered_.contains(id)) return NodeStatus::Unauthorized;
  return NodeStatus::New;
}

const NodeRecord& Repository::registered_or_throw(const NodeId& id) const {
  auto it = registered_.find(id);
  if (it == registered_.end()) fail(ErrorCode::NotFound, "node " + id + " is not registered");
  return it->second;
}

void Repository::check_applicable(const Mutation& m) const {
  std::visit(overloaded{
                 [&](const mutation::Register& r) {
                   if (classify_padl(r.padl) != NodeStatus::New) {
                     fail(ErrorCode::Conflict, "PADL " + r.padl.digest() + " is already known");
                   }
                   r.om.generator_net.validate();
                 },
                 [&](const mutation::Deny& d) {
                   if (classify_padl(d.padl) != NodeStatus::New) {
                     fail(ErrorCode::Conflict, "PADL " + d.padl.digest() + " is already known");
                   }
                 },
                 [&](const mutation::Revoke& r) { registered_or_throw(r.node_id); },
                 [&](const mutation::Readmit& r) {
                   if (registered_.contains(r.node_id)) {
                     fail(ErrorCode::Validation, "node " + r.node_id + " is already registered");
                   }
                   if (!unregistered_.contains(r.node_id)) fail(ErrorCode::NotFound, "node " + r.node_id + " is unknown");
                   r.om.generator_net.validate();
                 },
                 [&](const mutation::PutOm& p) {
                   registered_or_throw(p.node_id);
                   p.om.generator_net.validate();
                 },
                 [&](const mutation::AppendPattern& a) {
                   registered_or_throw(a.node_id);
                   a.pattern.validate();
                   if (auto it = histories_.find(a.node_id); it != histories_.end() && !it->second.empty() &&
                                                              a.pattern.produced_at < it->second.back().produced_at) {
                     fail(ErrorCode::Validation, "pattern for " + a.node_id + " predates the stored history");
                   }
                 },
             },
             m);
}

void Repository::apply(const Mutation& m) {
  std::visit(overloaded{
                 [&](const mutation::Register& r) {
                   const NodeId id = r.padl.digest();
                   registered_.emplace(id, NodeRecord{id, r.padl, NodeStatus::Authorized, r.at});
                   oms_.insert_or_assign(id, r.om);
                   histories_[id].clear();
                 },
                 [&](const mutation::Deny& d) {
                   const NodeId id = d.padl.digest();
                   unregistered_.emplace(id, NodeRecord{id, d.padl, NodeStatus::Unauthorized, d.at});
                 },
                 [&](const mutation::Revoke& r) {
                   auto node = registered_.extract(r.node_id);
                   node.mapped().status = NodeStatus::Unauthorized;
                   unregistered_.insert(std::move(node));
                   oms_.erase(r.node_id);
                   histories_.erase(r.node_id);
                 },
                 [&](const mutation::Readmit& r) {
                   auto node = unregistered_.extract(r.node_id);
                   node.mapped().status = NodeStatus::Authorized;
                   node.mapped().admitted_at = r.at;
                   registered_.insert(std::move(node));
                   oms_.insert_or_assign(r.node_id, r.om);
                   histories_[r.node_id].clear();
                 },
                 [&](const mutation::PutOm& p) {
                   oms_.insert_or_assign(p.node_id, p.om);
                   if (p.reset_history) histories_[p.node_id].clear();
                 },
                 [&](const mutation::AppendPattern& a) {
                   auto& hist = histories_[a.node_id];
                   hist.push_back(a.pattern);
                   while (hist.size() > options_.history_capacity) hist.pop_front();
                 },
             },
             m);
}

void Repository::commit(const Mutation& m) {
  check_applicable(m);
  if (journal_) journal_->append({{"mutation", to_json(m)}});
  apply(m);
}

NodeRecord Repository::register_node(const PadlFingerprint& padl, OperationalMatrix om, Timestamp at) {
  commit(mutation::Register{padl, std::move(om), at});
  return registered_.at(padl.digest());
}

void Repository::deny_node(const PadlFingerprint& padl, Timestamp at) { commit(mutation::Deny{padl, at}); }

void Repository::revoke_node(const NodeId& id) { commit(mutation::Revoke{id}); }

void Repository::readmit_node(const NodeId& id, OperationalMatrix om, Timestamp at) {
  commit(mutation::Readmit{id, std::move(om), at});
}

OperationalMatrix Repository::get_om(const NodeId& id) const {
  auto it = oms_.find(id);
  if (it == oms_.end()) fail(ErrorCode::NotFound, "no operational matrix for node " + id);
  return it->second;
}

void Repository::put_om(const NodeId& id, OperationalMatrix om, bool reset_history) {
  commit(mutation::PutOm{id, std::move(om), reset_history});
}

void Repository::append_pattern(const NodeId& id, BehaviorPattern bh) {
  commit(mutation::AppendPattern{id, std::move(bh)});
}

PatternHistory Repository::training_set(const NodeId& id) const {
  registered_or_throw(id);
  PatternHistory history{id, options_.history_capacity, {}};
  if (auto it = histories_.find(id); it != histories_.end()) {
    history.patterns.assign(it->second.begin(), it->second.end());
  }
  return history;
}

const NodeRecord* Repository::find(const NodeId& id) const {
  if (auto it = registered_.find(id); it != registered_.end()) return &it->second;
  if (auto it = unregistered_.find(id); it != unregistered_.end()) return &it->second;
  return nullptr;
}

std::vector<NodeRecord> Repository::nodes() const {
  std::vector<NodeRecord> out;
  out.reserve(registered_.size() + unregistered_.size());
  for (const auto& [_, rec] : registered_) out.push_back(rec);
  for (const auto& [_, rec] : unregistered_) out.push_back(rec);
  return out;
}

void Repository::check_invariants() const {
  for (const auto& [id, rec] : registered_) {
    if (unregistered_.contains(id)) fail(ErrorCode::Validation, "digest " + id + " is in both sections");
    if (rec.status != NodeStatus::Authorized) fail(ErrorCode::Validation, "registered node " + id + " not authorized");
    if (!oms_.contains(id)) fail(ErrorCode::Validation, "registered node " + id + " has no operational matrix");
  }
  for (const auto& [id, rec] : unregistered_) {
    if (rec.status != NodeStatus::Unauthorized) fail(ErrorCode::Validation, "unregistered node " + id + " authorized");
  }
  for (const auto& [id, _] : oms_) {
    if (!registered_.contains(id)) fail(ErrorCode::Validation, "operational matrix for unregistered digest " + id);
  }
  for (const auto& [id, hist] : histories_) {
    if (!registered_.contains(id)) fail(ErrorCode::Validation, "pattern history for unregistered digest " + id);
    if (hist.size() > options_.history_capacity) fail(ErrorCode::Validation, "pattern history over capacity");
    for (std::size_t i = 1; i < hist.size(); ++i) {
      if (hist[i].produced_at < hist[i - 1].produced_at) {
        fail(ErrorCode::Validation, "pattern history for " + id + " is not chronological");
      }
    }
  }
}

nlohmann::json Repository::snapshot() const {
  nlohmann::json registered = nlohmann::json::array();
  for (const auto& [_, rec] : registered_) registered.push_back(to_json(rec));
  nlohmann::json unregistered = nlohmann::json::array();
  for (const auto& [_, rec] : unregistered_) unregistered.push_back(to_json(rec));
  nlohmann::json oms = nlohmann::json::object();
  for (const auto& [id, om] : oms_) oms[id] = to_json(om);
  nlohmann::json patterns = nlohmann::json::object();
  for (const auto& [id, hist] : histories_) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : hist) list.push_back(to_json(p));
    patterns[id] = std::move(list);
  }
  return {{"format", "cogsec.repository"},
          {"version", kSnapshotVersion},
          {"history_capacity", options_.history_capacity},
          {"registered", std::move(registered)},
          {"unregistered", std::move(unregistered)},
          {"operational_matrices", std::move(oms)},
          {"behavior_patterns", std::move(patterns)}};
}

std::string Repository::snapshot_text() const { return snapshot().dump(1) + '\n'; }

void Repository::save_snapshot(const std::filesystem::path& file) const { write_file_atomic(file, snapshot_text()); }

void Repository::checkpoint() {
  if (!journal_) fail(ErrorCode::Persistence, "repository has no journal attached");
  save_snapshot(dir_ / kSnapshotFile);
  journal_->reset();
}

}  // namespace cogsec
