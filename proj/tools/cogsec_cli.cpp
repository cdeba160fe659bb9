// cogsec command-line entry point. Links only the C API.
//
// Exit codes: 0 success, 1 runtime failure, 2 bad arguments or configuration.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cogsec/cogsec.h"
#include "server/admin_server.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct CliFailure {
  int exit_code;
  std::string message;
};

[[noreturn]] void fail_with(cogsec_status st, const std::string& context) {
  const int code = (st == COGSEC_ERR_CONFIG) ? kExitConfig : kExitRuntime;
  throw CliFailure{code, context + ": [" + cogsec_status_name(st) + "] " + cogsec_last_error()};
}

void check(cogsec_status st, const std::string& context) {
  if (st != COGSEC_OK) fail_with(st, context);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  cogsec_string_free(s);
  return out;
}

std::string read_text(const fs::path& file, int exit_code, const char* what) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CliFailure{exit_code, std::string("cannot read ") + what + " " + file.string()};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_atomic(const fs::path& file, const std::string& contents) {
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << contents;
    out.flush();
    if (!out) throw CliFailure{kExitRuntime, "cannot write " + tmp.string()};
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw CliFailure{kExitRuntime, "cannot rename report into " + file.string()};
  }
}

struct CommonOptions {
  std::string config_path;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::string format = "tabular";

  // Configuration text, validated before any work starts. Empty means defaults.
  std::string config_text;

  const char* config() const { return config_text.empty() ? nullptr : config_text.c_str(); }
  const std::uint64_t* seed_ptr() const { return seed ? &*seed : nullptr; }
  bool structured() const { return format == "structured"; }
};

void load_config(CommonOptions& opts) {
  if (opts.config_path.empty()) return;
  opts.config_text = read_text(opts.config_path, kExitConfig, "configuration file");
  char* normalized = nullptr;
  check(cogsec_config_normalize(opts.config_text.c_str(), &normalized), "invalid configuration " + opts.config_path);
  cogsec_string_free(normalized);
}

void emit(const CommonOptions& opts, const std::string& stem, const std::string& structured,
          const std::string& tabular) {
  const std::string& text = opts.structured() ? structured : tabular;
  if (!opts.output_dir.empty()) {
    std::error_code ec;
    fs::create_directories(opts.output_dir, ec);
    if (ec) throw CliFailure{kExitRuntime, "cannot create " + opts.output_dir};
    const fs::path file = fs::path(opts.output_dir) / (stem + (opts.structured() ? ".json" : ".tsv"));
    write_atomic(file, text);
    std::cerr << "wrote " << file.string() << '\n';
  }
  std::cout << text;
}

std::string fmt_num(const json& v) {
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  return v.dump();
}

// Tab-separated table: header row, then one row per element of `rows`.
std::string table(const json& rows, const std::vector<std::string>& columns) {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "\t" : "") + columns[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "\t" : "") + fmt_num(row.at(columns[i]));
    out += '\n';
  }
  return out;
}

int run_simulate(const CommonOptions& opts) {
  if (opts.output_dir.empty()) throw CliFailure{kExitConfig, "simulate requires --output-dir"};
  char* out = nullptr;
  check(cogsec_simulate(opts.config(), opts.seed_ptr(), opts.output_dir.c_str(), &out), "simulate");
  const json summary = json::parse(take(out));
  write_atomic(fs::path(opts.output_dir) / "summary.json", summary.dump(2) + "\n");
  if (opts.structured()) {
    std::cout << summary.dump(2) << '\n';
  } else {
    for (const auto& [k, v] : summary.items()) {
      if (!v.is_object()) std::cout << k << '\t' << fmt_num(v) << '\n';
    }
    for (const auto& [k, v] : summary["paths"].items()) std::cout << "path." << k << '\t' << v << '\n';
  }
  return 0;
}

int run_detect(const CommonOptions& opts, const std::vector<std::size_t>& sizes) {
  char* out = nullptr;
  check(cogsec_detect(opts.config(), opts.seed_ptr(), sizes.empty() ? nullptr : sizes.data(), sizes.size(), &out),
        "detect");
  const json report = json::parse(take(out));
  const std::string tabular =
      table(report["runs"], {"training_set_size", "seed", "detection_rate", "false_positive_rate",
                             "mean_eval_latency_ms", "mean_cached_eval_latency_ms", "injected_malicious",
                             "detected_malicious", "false_positive_nodes"}) +
      "\n" +
      table(report["by_training_set_size"], {"training_set_size", "runs", "mean_detection_rate", "min_detection_rate",
                                             "max_detection_rate", "mean_false_positive_rate",
                                             "max_false_positive_rate", "mean_cached_eval_latency_ms"});
  emit(opts, "detect", report.dump(2) + "\n", tabular);
  return 0;
}

int run_sweep_neurons(const CommonOptions& opts) {
  char* out = nullptr;
  check(cogsec_sweep_neurons(opts.config(), opts.seed_ptr(), &out), "sweep-neurons");
  const json report = json::parse(take(out));
  emit(opts, "sweep_neurons", report.dump(2) + "\n",
       table(report["rows"], {"seed", "inputs", "train_error", "test_error"}) + "\n" +
           table(report["minimum"], {"seed", "inputs", "train_error"}));
  return 0;
}

int run_sweep_train(const CommonOptions& opts) {
  char* out = nullptr;
  check(cogsec_sweep_train(opts.config(), opts.seed_ptr(), &out), "sweep-train");
  const json report = json::parse(take(out));
  emit(opts, "sweep_train", report.dump(2) + "\n",
       table(report["cells"], {"seed", "learning_rate", "iterations", "train_error", "test_error"}) + "\n" +
           table(report["minimum"], {"seed", "learning_rate", "iterations", "train_error"}));
  return 0;
}

int run_replay(const CommonOptions& opts, const std::string& audit, const std::string& expect) {
  char* out = nullptr;
  check(cogsec_replay(opts.config(), audit.c_str(), &out), "replay");
  const std::string snapshot = take(out);
  if (!opts.output_dir.empty()) {
    std::error_code ec;
    fs::create_directories(opts.output_dir, ec);
    write_atomic(fs::path(opts.output_dir) / "replayed_snapshot.json", snapshot);
  }
  if (expect.empty()) {
    std::cout << snapshot;
    return 0;
  }
  const std::string recorded = read_text(expect, kExitRuntime, "expected snapshot");
  if (recorded != snapshot) {
    std::cerr << "replay: snapshot differs from " << expect << '\n';
    return kExitRuntime;
  }
  std::cout << "replay: snapshot matches " << expect << " (" << snapshot.size() << " bytes)\n";
  return 0;
}

int run_serve(const CommonOptions& opts, std::string bind, int port, std::string state_dir) {
  json config = opts.config_text.empty() ? json::object() : json::parse(opts.config_text);
  const json server = config.value("server", json::object());
  if (bind.empty()) bind = server.value("bind", std::string("127.0.0.1"));
  if (port < 0) port = server.value("port", 8080);
  if (state_dir.empty()) state_dir = server.value("state_dir", std::string("state"));
  if (const char* env = std::getenv("COGSEC_BIND"); env && *env) {
    const std::string value = env;
    const auto colon = value.rfind(':');
    if (colon != std::string::npos && value.find(':') == colon) {
      bind = value.substr(0, colon);
      port = std::atoi(value.c_str() + colon + 1);
    } else {
      bind = value;
    }
  }

  cogsec_csm* csm = nullptr;
  check(cogsec_csm_create(opts.config(), state_dir.c_str(), &csm), "serve");
  cogsec::server::AdminServer server_impl(csm);

  // Handle SIGINT/SIGTERM on a dedicated thread so shutdown is orderly.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const int bound = server_impl.bind(bind, port);
  if (bound < 0) {
    cogsec_csm_destroy(csm);
    throw CliFailure{kExitRuntime, "cannot bind " + bind + ":" + std::to_string(port)};
  }
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server_impl.stop();
  });
  std::cerr << "cogsec admin API listening on http://" << bind << ":" << bound << "/api/v1 (state " << state_dir
            << ")\n";
  server_impl.listen_after_bind();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  cogsec_csm_destroy(csm);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cogsec: cognitive security manager for a simulated WLAN"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cogsec_version()));

  CommonOptions opts;
  auto add_common = [&](CLI::App* sub, bool with_format = true) {
    sub->add_option("-c,--config", opts.config_path, "Configuration file (JSON); defaults when omitted");
    sub->add_option("-o,--output-dir", opts.output_dir, "Directory for report files");
    sub->add_option("--seed", opts.seed, "Override the seed (experiments run only this seed)");
    if (with_format) {
      sub->add_option("--format", opts.format, "Report format")
          ->check(CLI::IsMember({"tabular", "structured"}))
          ->capture_default_str();
    }
  };

  auto* simulate = app.add_subcommand("simulate", "Run the simulated WLAN through a CSM and record trace/audit/snapshot");
  add_common(simulate);
  auto* detect = app.add_subcommand("detect", "Detection-rate experiment");
  add_common(detect);
  std::vector<std::size_t> sizes;
  detect->add_option("--training-set-sizes", sizes, "Training-set sizes to sweep (default: configured size)");
  auto* sweep_neurons = app.add_subcommand("sweep-neurons", "Input-layer width sweep");
  add_common(sweep_neurons);
  auto* sweep_train = app.add_subcommand("sweep-train", "Learning-rate x iteration sweep");
  add_common(sweep_train);
  auto* replay = app.add_subcommand("replay", "Rebuild repository state from an audit log");
  add_common(replay, false);
  std::string audit_path, expect_path;
  replay->add_option("--audit", audit_path, "Audit log (JSON lines)")->required();
  replay->add_option("--expect", expect_path, "Recorded snapshot to compare against");
  auto* serve = app.add_subcommand("serve", "Serve the admin HTTP API");
  add_common(serve, false);
  std::string bind, state_dir;
  int port = -1;
  serve->add_option("--bind", bind, "Bind address (COGSEC_BIND overrides)");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--state-dir", state_dir, "Directory holding the persistent audit log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    load_config(opts);
    if (*simulate) return run_simulate(opts);
    if (*detect) return run_detect(opts, sizes);
    if (*sweep_neurons) return run_sweep_neurons(opts);
    if (*sweep_train) return run_sweep_train(opts);
    if (*replay) return run_replay(opts, audit_path, expect_path);
    if (*serve) return run_serve(opts, bind, port, state_dir);
  } catch (const CliFailure& f) {
    std::cerr << "cogsec: " << f.message << '\n';
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "cogsec: unexpected failure: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
