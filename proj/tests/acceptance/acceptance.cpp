// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Criteria 1-4 check the library in-process
// against independent oracles; 5-9 drive the command-line tool.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogsec/csm.hpp"
#include "cogsec/error.hpp"
#include "cogsec/mlp.hpp"
#include "cogsec/policy.hpp"
#include "cogsec/repository.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cogsec;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradientTolerance = 1e-6;
constexpr double kFiniteDifferenceStep = 1e-5;
constexpr int kGradientCases = 100;
constexpr double kGradientBudgetS = 10.0;

constexpr double kNeuronTolerance = 1e-12;
constexpr int kNeuronCases = 1000;

constexpr double kXorMse = 0.05;
constexpr int kXorSeeds = 5;
constexpr int kXorRequired = 4;
constexpr double kXorBudgetS = 30.0;

constexpr int kConformanceCases = 1000;
constexpr double kConformanceBudgetS = 30.0;

constexpr double kMinDetectionRate = 0.95;
constexpr double kMaxFalsePositiveRate = 0.05;
constexpr double kDetectionBudgetS = 300.0;

constexpr double kTrendBand = 0.05;
constexpr double kTrendBudgetS = 600.0;

constexpr double kCachedLatencyBudgetMs = 20.0;

constexpr std::size_t kReplayEvents = 500;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct CliRun {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliRun run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "cli.stdout";
  const fs::path err = scratch / "cli.stderr";
  const std::string cmd =
      std::string("'") + COGSEC_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

// ---------------------------------------------------------------------------
// 1. Analytic gradient vs central finite differences.

Outcome gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Relative error of the whole gradient vector per case. The componentwise
  // maximum is reported too; it is dominated by components near the
  // finite-difference noise floor (about 1e-13 absolute at this step).
  double worst = 0.0, componentwise = 0.0;
  std::size_t params = 0;
  for (int c = 0; c < kGradientCases; ++c) {
    // Every fifth case uses the largest shape; the rest are random shapes up to it.
    const bool largest = c % 5 == 0;
    const std::size_t in = largest ? 5 : 1 + rng() % 5;
    const std::size_t hidden = largest ? 8 : 1 + rng() % 8;
    const std::size_t out = largest ? 3 : 1 + rng() % 3;
    auto net = mlp::init_weights({{in, hidden, out}}, {0.2, 1, rng(), 1.0});
    for (auto& layer : net.layers) {
      for (auto& b : layer.biases) b = unit(rng) - 0.5;
    }
    mlp::Sample s;
    for (std::size_t i = 0; i < in; ++i) s.input.push_back(unit(rng));
    for (std::size_t k = 0; k < out; ++k) s.target.push_back(unit(rng));
    const auto analytic = mlp::gradient(net, s);
    const auto numeric = oracle::finite_difference_gradient(net, s, kFiniteDifferenceStep);
    worst = std::max(worst, oracle::normwise_relative_error(analytic, numeric));
    componentwise = std::max(componentwise, oracle::max_relative_error(analytic, numeric));
    params += net.parameter_count();
  }
  const double elapsed = seconds_since(t0);
  return {worst <= kGradientTolerance && elapsed < kGradientBudgetS,
          std::to_string(kGradientCases) + " cases, " + std::to_string(params) + " parameters, max relative error " +
              fmt("%.3g", worst) + " (<= " + fmt("%g", kGradientTolerance) + "), worst single component " +
              fmt("%.3g", componentwise) + ", " + fmt("%.2f", elapsed) + " s"};
}

// ---------------------------------------------------------------------------
// 2. Neuron equation vs scalar oracle.

Outcome neuron_conformance() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  double worst = 0.0;
  for (int c = 0; c < kNeuronCases; ++c) {
    const std::size_t n = 1 + rng() % 16;
    std::vector<double> x(n), w(n);
    for (auto& v : x) v = u(rng);
    for (auto& v : w) v = u(rng);
    const double b = u(rng);
    worst = std::max(worst, std::abs(mlp::neuron_output(x, w, b) - oracle::neuron(x, w, b)));
  }
  const bool half = mlp::sigmoid(0.0) == 0.5;
  return {worst <= kNeuronTolerance && half,
          std::to_string(kNeuronCases) + " inputs, max |diff| " + fmt("%.3g", worst) + " (<= " +
              fmt("%g", kNeuronTolerance) + "), sigmoid(0) " + (half ? "== 0.5" : "!= 0.5")};
}

// ---------------------------------------------------------------------------
// 3. XOR at lr 0.2 and 10000 passes.

Outcome xor_sanity() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<mlp::Sample> data{{{0, 0}, {0}}, {{0, 1}, {1}}, {{1, 0}, {1}}, {{1, 1}, {0}}};
  int converged = 0;
  std::string errors;
  for (int seed = 1; seed <= kXorSeeds; ++seed) {
    mlp::TrainingConfig cfg{0.2, 10000, static_cast<std::uint64_t>(seed), 0.5};
    auto result = mlp::train_backprop(mlp::init_weights({{2, 2, 1}}, cfg), data, cfg);
    const double mse = mlp::mean_squared_error(result.net, data);
    if (mse < kXorMse) ++converged;
    errors += (errors.empty() ? "" : " ") + fmt("%.2g", mse);
  }
  const double elapsed = seconds_since(t0);
  return {converged >= kXorRequired && elapsed < kXorBudgetS,
          std::to_string(converged) + "/" + std::to_string(kXorSeeds) + " seeds below MSE " + fmt("%g", kXorMse) +
              " [" + errors + "], " + fmt("%.2f", elapsed) + " s"};
}

// ---------------------------------------------------------------------------
// 4. Algorithm conformance over randomized repository states.

struct ConformanceTally {
  std::map<std::string, int> hits;
  std::vector<std::string> failures;  // first few, for the report
  int failed = 0;

  void check(bool ok, int c, const std::string& what) {
    if (ok) return;
    ++failed;
    if (failures.size() < 5) failures.push_back("case " + std::to_string(c) + ": " + what);
  }
};

void conformance_case(int c, ConformanceTally& tally) {
  std::mt19937_64 rng(1000 + c);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  CsmConfig cfg;
  cfg.policy.training.iterations = 60;
  cfg.policy.theta = 0.02 + 0.38 * unit(rng);
  cfg.repository.history_capacity = 4 + rng() % 9;
  const AdminPolicy::Mode modes[] = {AdminPolicy::Mode::AutoApproveAll, AdminPolicy::Mode::AutoDenyAll,
                                     AdminPolicy::Mode::Interactive};
  cfg.admin.mode = modes[rng() % 3];
  const ActivityEncoder enc(cfg.generator);
  const auto spec = cfg.generator.layer_spec();

  // Random starting state, mirrored in a reference model.
  Repository repo(cfg.repository);
  std::map<NodeId, NodeStatus> model;
  std::vector<PadlFingerprint> known;
  const int nodes = 1 + static_cast<int>(rng() % 6);
  Timestamp t = 0;
  for (int i = 0; i < nodes; ++i) {
    auto p = fixtures::padl(c * 16 + i, i % 2 ? "mt7921e" : "ath9k");
    const auto id = p.digest();
    switch (rng() % 3) {
      case 0: {
        OperationalMatrix om;
        om.issuer = "admin";
        om.encoding_id = enc.encoding_id();
        om.generator_net = mlp::init_weights(spec, {0.2, 1, rng(), 2.0});
        repo.register_node(p, om, ++t);
        const std::size_t patterns = rng() % (cfg.repository.history_capacity + 4);
        for (std::size_t k = 0; k < patterns; ++k) {
          BehaviorPattern bh{std::vector<double>(cfg.generator.pattern_dim), ++t};
          const double center = 0.3 + 0.4 * unit(rng);
          for (auto& v : bh.values) v = std::clamp(center + 0.05 * (unit(rng) - 0.5), 0.0, 1.0);
          repo.append_pattern(id, bh);
        }
        model[id] = NodeStatus::Authorized;
        break;
      }
      case 1:
        repo.deny_node(p, ++t);
        model[id] = NodeStatus::Unauthorized;
        break;
      default:
        repo.register_node(p, fixtures::om(), ++t);
        repo.revoke_node(id);
        model[id] = NodeStatus::Unauthorized;
        break;
    }
    known.push_back(p);
  }
  const auto fresh = fixtures::padl(c * 16 + 15);

  // (a) three-way classification against the model.
  for (const auto& p : known) tally.check(repo.classify_padl(p) == model[p.digest()], c, "classification of known PADL");
  tally.check(repo.classify_padl(fresh) == NodeStatus::New, c, "classification of unseen PADL");
  tally.hits["a"]++;

  Csm csm(cfg, std::move(repo));
  const bool pick_new = rng() % 4 == 0;
  const auto target = pick_new ? fresh : known[rng() % known.size()];
  const auto id = target.digest();
  const NodeStatus before_status = pick_new ? NodeStatus::New : model[id];
  const std::string before = csm.snapshot_text();
  const std::size_t history_before =
      before_status == NodeStatus::Authorized ? csm.repository_unsafe().training_set(id).patterns.size() : 0;
  const OperationalMatrix om_before =
      before_status == NodeStatus::Authorized ? csm.repository_unsafe().get_om(id) : OperationalMatrix{};

  NodeEvent ev = fixtures::event(target, (++t) * 60000, 0.3 + 2.7 * unit(rng));
  const auto outcome = csm.handle_event(ev);
  const auto& repo_after = csm.repository_unsafe();

  switch (before_status) {
    case NodeStatus::New:
      if (cfg.admin.mode == AdminPolicy::Mode::AutoApproveAll) {
        // (b) registration with the conservative OM and an empty history.
        tally.check(outcome.path_taken == PathTaken::NewAutoApproved, c, "auto-approve path");
        tally.check(repo_after.classify_padl(target) == NodeStatus::Authorized, c, "registered node is authorized");
        tally.check(repo_after.get_om(id) == conservative_om(spec, cfg.generator, enc, "auto-policy", ev.received_at),
                    c, "registered OM is the conservative OM");
        tally.check(repo_after.training_set(id).patterns.empty(), c, "registered history is empty");
        tally.hits["b"]++;
      } else if (cfg.admin.mode == AdminPolicy::Mode::AutoDenyAll) {
        tally.check(repo_after.classify_padl(target) == NodeStatus::Unauthorized, c, "denied node is unauthorized");
        tally.check(!repo_after.has_om(id) && !repo_after.has_history(id), c, "denied node has no OM or history");
        tally.hits["b-deny"]++;
      } else {
        tally.check(outcome.path_taken == PathTaken::NewPending && csm.snapshot_text() == before, c,
                    "pending node does not change state");
        tally.hits["b-pending"]++;
      }
      break;
    case NodeStatus::Authorized: {
      tally.check(outcome.deviation.has_value(), c, "authorized event carries a report");
      if (!outcome.deviation) break;
      const auto& r = *outcome.deviation;
      const bool deviated = r.score >= cfg.policy.theta;
      tally.check(r.theta_used == cfg.policy.theta, c, "report carries theta in force");
      tally.check((r.decision == Decision::Deviated) == deviated, c, "decision follows score >= theta");
      if (r.decision == Decision::Normal) {
        // (c) exactly one pattern appended, OM untouched.
        const auto h = repo_after.training_set(id).patterns;
        const std::size_t expect = std::min(history_before + 1, cfg.repository.history_capacity);
        tally.check(outcome.path_taken == PathTaken::AuthorizedNormal, c, "normal path taken");
        tally.check(h.size() == expect, c, "history grew by exactly one (bounded)");
        tally.check(!h.empty() && h.back() == generate_pattern(om_before, ev.activity, enc), c,
                    "appended pattern is the generated one");
        tally.check(repo_after.get_om(id) == om_before, c, "OM unchanged on the normal path");
        tally.hits["c"]++;
      } else {
        // (d) OM and history purged, PADL moved to unregistered.
        tally.check(outcome.path_taken == PathTaken::AuthorizedRevoked, c, "revoke path taken");
        tally.check(repo_after.classify_padl(target) == NodeStatus::Unauthorized, c, "revoked PADL is unregistered");
        tally.check(!repo_after.has_om(id) && !repo_after.has_history(id), c, "revocation purges OM and history");
        tally.hits["d"]++;
      }
      break;
    }
    case NodeStatus::Unauthorized:
      // (e) blocked events never mutate state.
      tally.check(outcome.path_taken == PathTaken::UnauthorizedBlocked, c, "blocked path taken");
      tally.check(csm.snapshot_text() == before, c, "blocked event leaves state untouched");
      tally.check(csm.audit_log().back().mutations.empty(), c, "blocked event records no mutation");
      tally.hits["e"]++;
      break;
  }
  repo_after.check_invariants();

  // (f) quarantine holds until ReadmitNode.
  if (repo_after.classify_padl(target) == NodeStatus::Unauthorized) {
    const std::string quarantined = csm.snapshot_text();
    const int extra = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < extra; ++k) {
      auto o = csm.handle_event(fixtures::event(target, (++t) * 60000, 0.5 + unit(rng)));
      tally.check(o.path_taken == PathTaken::UnauthorizedBlocked, c, "quarantined node stays blocked");
    }
    tally.check(csm.snapshot_text() == quarantined, c, "quarantine leaves state untouched");
    csm.apply_admin_action({AdminActionKind::ReadmitNode, id, std::nullopt, "ops", ++t});
    tally.check(csm.repository_unsafe().classify_padl(target) == NodeStatus::Authorized, c, "readmit authorizes");
    auto o = csm.handle_event(fixtures::event(target, (++t) * 60000));
    tally.check(o.path_taken == PathTaken::AuthorizedNormal || o.path_taken == PathTaken::AuthorizedRevoked, c,
                "readmitted node is evaluated again");
    tally.hits["f"]++;
  }
  csm.repository_unsafe().check_invariants();
}

Outcome algorithm_conformance() {
  const auto t0 = std::chrono::steady_clock::now();
  ConformanceTally tally;
  for (int c = 0; c < kConformanceCases; ++c) {
    try {
      conformance_case(c, tally);
    } catch (const std::exception& e) {
      tally.check(false, c, std::string("exception: ") + e.what());
    }
  }
  const double elapsed = seconds_since(t0);
  std::string detail = std::to_string(kConformanceCases) + " cases;";
  bool covered = true;
  for (const char* key : {"a", "b", "c", "d", "e", "f"}) {
    detail += std::string(" ") + key + "=" + std::to_string(tally.hits[key]);
    covered = covered && tally.hits[key] > 0;
  }
  detail += ", " + std::to_string(tally.failed) + " violations, " + fmt("%.2f", elapsed) + " s";
  for (const auto& f : tally.failures) detail += "\n    " + f;
  if (!covered) detail += "\n    not every property was exercised";
  return {tally.failed == 0 && covered && elapsed < kConformanceBudgetS, detail};
}

// ---------------------------------------------------------------------------
// 5 and 8. Detection at full scale through the CLI.

struct DetectRun {
  bool ok = false;
  json doc;
  double seconds = 0.0;
  std::string error;
};

DetectRun run_detect(const fs::path& scratch, const std::string& extra) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out = scratch / "reports";
  auto r = run_cli("detect --format structured -c " + quote(COGSEC_DEFAULT_CONFIG) + " -o " + quote(out) + extra,
                   scratch);
  DetectRun run;
  run.seconds = seconds_since(t0);
  if (r.exit_code != 0) {
    run.error = "exit " + std::to_string(r.exit_code) + ": " + r.err;
    return run;
  }
  run.doc = json::parse(read_file(out / "detect.json"), nullptr, false);
  run.ok = !run.doc.is_discarded() && run.doc.contains("runs");
  if (!run.ok) run.error = "detect.json is not a report";
  return run;
}

Outcome detection_at_scale(const DetectRun& run, const json& config) {
  if (!run.ok) return {false, run.error};
  const auto& sim = config.at("sim");
  std::string detail = std::to_string(sim.at("node_count").get<int>()) + " nodes, " +
                       std::to_string(sim.at("ap_count").get<int>()) + " APs, " +
                       std::to_string(config.at("csm").at("generator").at("feature_dim").get<int>()) +
                       " features, T=" + std::to_string(config.at("experiments").at("detect_training_set_size").get<int>()) +
                       ";";
  bool pass = true;
  std::size_t seeds = 0;
  for (const auto& r : run.doc["runs"]) {
    const double det = r["detection_rate"], fpr = r["false_positive_rate"];
    pass = pass && det >= kMinDetectionRate && fpr <= kMaxFalsePositiveRate && !r["zero_injected"].get<bool>();
    detail += " seed " + std::to_string(r["seed"].get<int>()) + ": det " + fmt("%.3f", det) + " fpr " + fmt("%.3f", fpr) + ";";
    ++seeds;
  }
  pass = pass && seeds == 5 && run.seconds < kDetectionBudgetS;
  detail += " thresholds det >= " + fmt("%g", kMinDetectionRate) + ", fpr <= " + fmt("%g", kMaxFalsePositiveRate) +
            ", " + fmt("%.1f", run.seconds) + " s";
  return {pass, detail};
}

Outcome cached_latency(const DetectRun& run) {
  if (!run.ok) return {false, "no detection report: " + run.error};
  double sum = 0.0, worst = 0.0;
  std::uint64_t cached = 0;
  std::size_t n = 0;
  for (const auto& r : run.doc["runs"]) {
    const double ms = r["mean_cached_eval_latency_ms"];
    sum += ms;
    worst = std::max(worst, ms);
    cached += r["cached_evaluations"].get<std::uint64_t>();
    ++n;
  }
  const double mean = n ? sum / static_cast<double>(n) : 0.0;
  return {n > 0 && cached > 0 && worst <= kCachedLatencyBudgetMs,
          std::to_string(cached) + " cached evaluations, mean " + fmt("%.4f", mean) + " ms, worst seed " +
              fmt("%.4f", worst) + " ms (<= " + fmt("%g", kCachedLatencyBudgetMs) + " ms)"};
}

// ---------------------------------------------------------------------------
// 6. Detection trend over training-set size.

Outcome learning_trend(const fs::path& scratch) {
  const std::vector<int> sizes{5, 10, 20, 50};
  auto run = run_detect(scratch, " --training-set-sizes 5 10 20 50");
  if (!run.ok) return {false, run.error};
  std::map<int, double> mean;
  for (const auto& row : run.doc["by_training_set_size"]) {
    mean[row["training_set_size"].get<int>()] = row["mean_detection_rate"].get<double>();
  }
  bool pass = mean.size() == sizes.size() && run.seconds < kTrendBudgetS;
  std::string detail = "mean detection";
  for (int s : sizes) detail += " T=" + std::to_string(s) + ":" + fmt("%.3f", mean[s]);
  // Every larger training set stays within the band of every smaller one.
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    for (std::size_t j = i + 1; j < sizes.size(); ++j) pass = pass && mean[sizes[j]] >= mean[sizes[i]] - kTrendBand;
  }
  detail += "; band " + fmt("%g", kTrendBand) + ", " + fmt("%.1f", run.seconds) + " s";
  return {pass, detail};
}

// ---------------------------------------------------------------------------
// 7. Sweep harnesses.

Outcome sweeps(const fs::path& scratch, const json& config) {
  const auto& e = config.at("experiments");
  const std::size_t seeds = e.at("seeds").size();
  const std::size_t widths = e.at("neuron_range").size();
  const std::size_t cells = e.at("lr_values").size() * e.at("iteration_values").size();
  std::string detail;
  bool pass = true;

  std::vector<std::string> neuron_text, train_text;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path out = scratch / ("sweep" + std::to_string(rep));
    const std::string base = " --format structured -c " + quote(COGSEC_DEFAULT_CONFIG) + " -o " + quote(out);
    auto n = run_cli("sweep-neurons" + base, scratch);
    auto t = run_cli("sweep-train" + base, scratch);
    if (n.exit_code != 0 || t.exit_code != 0) return {false, "sweep command failed: " + n.err + t.err};
    neuron_text.push_back(read_file(out / "sweep_neurons.json"));
    train_text.push_back(read_file(out / "sweep_train.json"));
  }
  const bool repeatable = neuron_text[0] == neuron_text[1] && train_text[0] == train_text[1];
  pass = pass && repeatable;

  const json neurons = json::parse(neuron_text[0]);
  const json train = json::parse(train_text[0]);
  const bool complete = neurons["rows"].size() == seeds * widths && train["cells"].size() == seeds * cells;
  pass = pass && complete;
  for (const auto* rows : {&neurons["rows"], &train["cells"]}) {
    for (const auto& r : *rows) {
      pass = pass && std::isfinite(r["train_error"].get<double>()) && std::isfinite(r["test_error"].get<double>());
    }
  }

  std::map<std::uint64_t, std::map<std::size_t, double>> at_lr;
  for (const auto& c : train["cells"]) {
    if (c["learning_rate"].get<double>() == 0.2) {
      at_lr[c["seed"].get<std::uint64_t>()][c["iterations"].get<std::size_t>()] = c["train_error"].get<double>();
    }
  }
  bool trend = at_lr.size() == seeds;
  for (auto& [seed, errs] : at_lr) {
    trend = trend && errs.count(1000) && errs.count(10000) && errs[10000] <= errs[1000];
  }
  pass = pass && trend;

  detail = std::to_string(neurons["rows"].size()) + " width rows, " + std::to_string(train["cells"].size()) +
           " grid cells, " + (repeatable ? "byte-identical on repeat" : "NOT repeatable") +
           "; lr 0.2 error(10000) <= error(1000) on " + (trend ? "all seeds" : "NOT all seeds") + "; minimum width:";
  for (const auto& m : neurons["minimum"]) detail += " " + std::to_string(m["inputs"].get<int>());
  return {pass, detail};
}

// ---------------------------------------------------------------------------
// 9. Event-sourced replay and interrupted writes.

// Injects a torn write at every byte offset of one journal entry and checks
// that neither the live repository nor the recovered one holds partial state.
bool interrupted_writes(std::string& detail) {
  const fs::path dir = fs::temp_directory_path() / ("cogsec-acceptance-journal-" + std::to_string(::getpid()));
  auto probe_len = [&](const Mutation& m) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    Journal j(dir / "probe.jsonl");
    j.append({{"mutation", to_json(m)}});
    return static_cast<std::size_t>(fs::file_size(dir / "probe.jsonl"));
  };
  const auto a = fixtures::padl(1), b = fixtures::padl(2);
  const std::size_t reg_len = probe_len(mutation::Register{b, fixtures::om(), 5});
  const std::size_t rev_len = probe_len(mutation::Revoke{a.digest()});
  bool ok = true;
  std::size_t trials = 0;
  for (std::size_t cut = 0; cut <= reg_len; ++cut, ++trials) {
    fs::remove_all(dir);
    std::string before;
    {
      auto repo = Repository::open(dir);
      repo.register_node(a, fixtures::om(), 0);
      before = repo.snapshot_text();
      repo.journal()->crash_after_bytes(cut);
      try {
        repo.register_node(b, fixtures::om(), 5);
        ok = false;
      } catch (const Error&) {
      }
      ok = ok && repo.snapshot_text() == before;
    }
    auto back = Repository::open(dir);
    back.check_invariants();
    const auto st = back.classify_padl(b);
    ok = ok && (cut < reg_len ? st == NodeStatus::New && back.snapshot_text() == before
                              : st == NodeStatus::Authorized && back.has_om(b.digest()) && back.has_history(b.digest()));
  }
  for (std::size_t cut = 0; cut <= rev_len; ++cut, ++trials) {
    fs::remove_all(dir);
    std::string before;
    {
      auto repo = Repository::open(dir);
      repo.register_node(a, fixtures::om(), 0);
      repo.append_pattern(a.digest(), fixtures::pattern(0.4, 1));
      before = repo.snapshot_text();
      repo.journal()->crash_after_bytes(cut);
      try {
        repo.revoke_node(a.digest());
        ok = false;
      } catch (const Error&) {
      }
      ok = ok && repo.snapshot_text() == before;
    }
    auto back = Repository::open(dir);
    back.check_invariants();
    const auto st = back.classify_padl(a);
    ok = ok && (cut < rev_len ? st == NodeStatus::Authorized && back.snapshot_text() == before
                              : st == NodeStatus::Unauthorized && !back.has_om(a.digest()) && !back.has_history(a.digest()));
  }
  fs::remove_all(dir);
  detail += "; torn register/revoke at every byte offset (" + std::to_string(trials) + " trials) " +
            (ok ? "left no partial state" : "LEFT PARTIAL STATE");
  return ok;
}

Outcome event_sourcing(const fs::path& scratch) {
  // 20 nodes x 25 epochs = 500 node events.
  json cfg = json::parse(read_file(COGSEC_DEFAULT_CONFIG));
  cfg["sim"]["node_count"] = 20;
  cfg["sim"]["ap_count"] = 2;
  cfg["sim"]["epochs"] = 25;
  cfg["sim"]["calibration_epochs"] = 8;
  cfg["sim"]["deviation"]["onset_epoch"] = 18;
  const fs::path cfg_file = scratch / "replay_config.json";
  std::ofstream(cfg_file) << cfg.dump(2);
  const fs::path out = scratch / "sim";
  auto sim = run_cli("simulate -c " + quote(cfg_file) + " -o " + quote(out), scratch);
  if (sim.exit_code != 0) return {false, "simulate failed: " + sim.err};

  std::size_t events = 0, revoked = 0, records = 0;
  std::istringstream audit(read_file(out / "audit.jsonl"));
  for (std::string line; std::getline(audit, line);) {
    const auto rec = json::parse(line);
    ++records;
    if (rec["kind"] == "event") ++events;
    if (rec["detail"] == "authorized_revoked") ++revoked;
  }
  auto replay = run_cli("replay -c " + quote(cfg_file) + " --audit " + quote(out / "audit.jsonl") + " --expect " +
                            quote(out / "snapshot.json") + " -o " + quote(out / "replay"),
                        scratch);
  const bool byte_equal = replay.exit_code == 0 &&
                          read_file(out / "replay" / "replayed_snapshot.json") == read_file(out / "snapshot.json");
  std::string detail = std::to_string(events) + " events (" + std::to_string(records) + " audit records, " +
                       std::to_string(revoked) + " revocations) replayed to a " +
                       (byte_equal ? "byte-equal" : "DIFFERENT") + " snapshot";
  const bool torn_ok = interrupted_writes(detail);
  return {events == kReplayEvents && byte_equal && torn_ok, detail};
}

}  // namespace

int main() {
  fixtures::TempDir scratch("acceptance");
  const json config = json::parse(read_file(COGSEC_DEFAULT_CONFIG));
  int failures = 0;
  auto report = [&](int n, const std::string& title, const Outcome& o) {
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << n << ": " << title << " -- " << o.detail
              << std::endl;
    if (!o.pass) ++failures;
  };
  auto guarded = [](const std::function<Outcome()>& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "backprop gradient matches central finite differences", guarded(gradient_check));
  report(2, "neuron output matches the scalar oracle", guarded(neuron_conformance));
  report(3, "XOR converges at lr 0.2 / 10000 passes", guarded(xor_sanity));
  report(4, "admission, evaluation and revocation properties", guarded(algorithm_conformance));

  for (const char* sub : {"detect", "trend", "sweeps", "replay"}) fs::create_directories(scratch.path() / sub);
  DetectRun detect;
  try {
    detect = run_detect(scratch.path() / "detect", "");
  } catch (const std::exception& e) {
    detect.error = e.what();
  }
  report(5, "detection experiment at full scale", guarded([&] { return detection_at_scale(detect, config); }));
  report(6, "detection rate does not fall with more training patterns",
         guarded([&] { return learning_trend(scratch.path() / "trend"); }));
  report(7, "sweep curves are complete and deterministic", guarded([&] { return sweeps(scratch.path() / "sweeps", config); }));
  report(8, "cached policy evaluation latency", guarded([&] { return cached_latency(detect); }));
  report(9, "audit replay and interrupted writes", guarded([&] { return event_sourcing(scratch.path() / "replay"); }));

  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
