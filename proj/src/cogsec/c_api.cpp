#include "cogsec/cogsec.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "cogsec/config.hpp"
#include "cogsec/csm.hpp"
#include "cogsec/error.hpp"
#include "cogsec/sim.hpp"

struct cogsec_csm {
  std::unique_ptr<cogsec::Csm> csm;
};

namespace {

using cogsec::ErrorCode;
using nlohmann::json;

thread_local std::string g_last_error;

struct ArgumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

cogsec_status status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Structural: return COGSEC_ERR_STRUCTURAL;
    case ErrorCode::Validation: return COGSEC_ERR_VALIDATION;
    case ErrorCode::Config: return COGSEC_ERR_CONFIG;
    case ErrorCode::Conflict: return COGSEC_ERR_CONFLICT;
    case ErrorCode::NotFound: return COGSEC_ERR_NOT_FOUND;
    case ErrorCode::Persistence: return COGSEC_ERR_PERSISTENCE;
    case ErrorCode::Training: return COGSEC_ERR_TRAINING;
  }
  return COGSEC_ERR_INTERNAL;
}

template <class F>
cogsec_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return COGSEC_OK;
  } catch (const cogsec::Error& e) {
    g_last_error = e.what();
    return status_for(e.code());
  } catch (const ArgumentError& e) {
    g_last_error = e.what();
    return COGSEC_ERR_ARGUMENT;
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed document: ") + e.what();
    return COGSEC_ERR_VALIDATION;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return COGSEC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return COGSEC_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw ArgumentError(std::string(what) + " must not be NULL");
}

void put(char** out, const std::string& text) {
  char* buf = static_cast<char*>(std::malloc(text.size() + 1));
  if (!buf) throw std::bad_alloc();
  std::memcpy(buf, text.c_str(), text.size() + 1);
  *out = buf;
}

void put(char** out, const json& doc) { put(out, doc.dump()); }

json parse_document(const char* text, const char* what) {
  auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) cogsec::fail(ErrorCode::Validation, std::string(what) + " is not valid JSON");
  return doc;
}

cogsec::AppConfig parse_config(const char* config_json) {
  if (!config_json) return cogsec::AppConfig{};
  auto doc = json::parse(config_json, nullptr, false);
  if (doc.is_discarded()) cogsec::fail(ErrorCode::Config, "configuration is not valid JSON");
  return cogsec::app_config_from_json(doc);
}

std::vector<std::uint64_t> seeds_for(const cogsec::AppConfig& config, const uint64_t* seed) {
  return seed ? std::vector<std::uint64_t>{*seed} : config.experiments.seeds;
}

json summarize(std::size_t size, const std::vector<cogsec::sim::SimMetrics>& runs) {
  double det_sum = 0, fpr_sum = 0, lat_sum = 0, cached_sum = 0;
  double det_min = std::numeric_limits<double>::infinity(), det_max = -det_min, fpr_max = 0;
  for (const auto& m : runs) {
    det_sum += m.detection_rate;
    fpr_sum += m.false_positive_rate;
    lat_sum += m.mean_eval_latency_ms;
    cached_sum += m.mean_cached_eval_latency_ms;
    det_min = std::min(det_min, m.detection_rate);
    det_max = std::max(det_max, m.detection_rate);
    fpr_max = std::max(fpr_max, m.false_positive_rate);
  }
  const double n = static_cast<double>(runs.size());
  return {{"training_set_size", size},
          {"runs", runs.size()},
          {"mean_detection_rate", det_sum / n},
          {"min_detection_rate", det_min},
          {"max_detection_rate", det_max},
          {"mean_false_positive_rate", fpr_sum / n},
          {"max_false_positive_rate", fpr_max},
          {"mean_eval_latency_ms", lat_sum / n},
          {"mean_cached_eval_latency_ms", cached_sum / n}};
}

cogsec_csm* checked(cogsec_csm* h) {
  require(h, "csm handle");
  if (!h->csm) throw ArgumentError("csm handle is not initialized");
  return h;
}

}  // namespace

extern "C" {

const char* cogsec_version(void) { return "0.1.0"; }

const char* cogsec_status_name(cogsec_status status) {
  switch (status) {
    case COGSEC_OK: return "ok";
    case COGSEC_ERR_STRUCTURAL: return "structural";
    case COGSEC_ERR_VALIDATION: return "validation";
    case COGSEC_ERR_CONFIG: return "config";
    case COGSEC_ERR_CONFLICT: return "conflict";
    case COGSEC_ERR_NOT_FOUND: return "not_found";
    case COGSEC_ERR_PERSISTENCE: return "persistence";
    case COGSEC_ERR_TRAINING: return "training";
    case COGSEC_ERR_ARGUMENT: return "argument";
    case COGSEC_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* cogsec_last_error(void) { return g_last_error.c_str(); }

void cogsec_string_free(char* s) { std::free(s); }

cogsec_status cogsec_default_config(char** out_json) {
  return guarded([&] {
    require(out_json, "out_json");
    put(out_json, cogsec::to_json(cogsec::AppConfig{}).dump(2));
  });
}

cogsec_status cogsec_config_normalize(const char* config_json, char** out_json) {
  return guarded([&] {
    require(config_json, "config_json");
    require(out_json, "out_json");
    put(out_json, cogsec::to_json(parse_config(config_json)).dump(2));
  });
}

cogsec_status cogsec_simulate(const char* config_json, const uint64_t* seed, const char* output_dir,
                              char** out_summary) {
  return guarded([&] {
    require(output_dir, "output_dir");
    require(out_summary, "out_summary");
    auto config = parse_config(config_json);
    if (seed) config.sim.seed = *seed;
    auto run = cogsec::sim::run_simulation(config.sim, config.csm);

    const std::filesystem::path dir(output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) cogsec::fail(ErrorCode::Persistence, "cannot create " + dir.string() + ": " + ec.message());
    std::ostringstream trace;
    cogsec::sim::write_trace(trace, run.trace);
    std::string audit;
    for (const auto& r : run.audit) audit += cogsec::to_json(r).dump() + '\n';
    cogsec::write_file_atomic(dir / "trace.jsonl", trace.str());
    cogsec::write_file_atomic(dir / "audit.jsonl", audit);
    cogsec::write_file_atomic(dir / "snapshot.json", run.snapshot_text);
    put(out_summary, run.summary);
  });
}

cogsec_status cogsec_detect(const char* config_json, const uint64_t* seed, const size_t* sizes, size_t size_count,
                            char** out_json) {
  return guarded([&] {
    require(out_json, "out_json");
    if (sizes && size_count == 0) throw ArgumentError("size_count must be positive when sizes is given");
    const auto config = parse_config(config_json);
    std::vector<std::size_t> set_sizes =
        sizes ? std::vector<std::size_t>(sizes, sizes + size_count)
              : std::vector<std::size_t>{config.experiments.detect_training_set_size};
    json runs = json::array();
    json by_size = json::array();
    for (std::size_t t : set_sizes) {
      std::vector<cogsec::sim::SimMetrics> metrics;
      for (std::uint64_t s : seeds_for(config, seed)) {
        auto sim = config.sim;
        sim.seed = s;
        metrics.push_back(cogsec::sim::run_detection_experiment(sim, config.csm, t));
        runs.push_back(cogsec::sim::to_json(metrics.back()));
      }
      by_size.push_back(summarize(t, metrics));
    }
    put(out_json, json{{"runs", runs}, {"by_training_set_size", by_size}});
  });
}

cogsec_status cogsec_sweep_neurons(const char* config_json, const uint64_t* seed, char** out_json) {
  return guarded([&] {
    require(out_json, "out_json");
    const auto config = parse_config(config_json);
    const auto& e = config.experiments;
    json rows = json::array();
    json minima = json::array();
    for (std::uint64_t s : seeds_for(config, seed)) {
      auto training = e.sweep_training;
      training.seed = s;
      auto result = cogsec::sim::sweep_input_neurons(e.neuron_range, e.sweep_task, training);
      const auto best = std::min_element(result.begin(), result.end(),
                                         [](const auto& a, const auto& b) { return a.train_error < b.train_error; });
      for (const auto& r : result) {
        rows.push_back({{"seed", s}, {"inputs", r.inputs}, {"train_error", r.train_error}, {"test_error", r.test_error}});
      }
      minima.push_back({{"seed", s}, {"inputs", best->inputs}, {"train_error", best->train_error}});
    }
    put(out_json, json{{"task", cogsec::sim::to_json(e.sweep_task)},
                       {"training", cogsec::mlp::to_json(e.sweep_training)},
                       {"rows", rows},
                       {"minimum", minima}});
  });
}

cogsec_status cogsec_sweep_train(const char* config_json, const uint64_t* seed, char** out_json) {
  return guarded([&] {
    require(out_json, "out_json");
    const auto config = parse_config(config_json);
    const auto& e = config.experiments;
    json cells = json::array();
    json minima = json::array();
    for (std::uint64_t s : seeds_for(config, seed)) {
      auto training = e.sweep_training;
      training.seed = s;
      auto grid = cogsec::sim::sweep_lr_iterations(e.lr_values, e.iteration_values, e.sweep_task, training,
                                                   e.sweep_input_dim);
      const auto best = std::min_element(grid.begin(), grid.end(),
                                         [](const auto& a, const auto& b) { return a.train_error < b.train_error; });
      for (const auto& c : grid) {
        cells.push_back({{"seed", s},
                         {"learning_rate", c.learning_rate},
                         {"iterations", c.iterations},
                         {"train_error", c.train_error},
                         {"test_error", c.test_error}});
      }
      minima.push_back({{"seed", s},
                        {"learning_rate", best->learning_rate},
                        {"iterations", best->iterations},
                        {"train_error", best->train_error}});
    }
    put(out_json, json{{"task", cogsec::sim::to_json(e.sweep_task)},
                       {"input_dim", e.sweep_input_dim},
                       {"cells", cells},
                       {"minimum", minima}});
  });
}

cogsec_status cogsec_replay(const char* config_json, const char* audit_path, char** out_snapshot) {
  return guarded([&] {
    require(audit_path, "audit_path");
    require(out_snapshot, "out_snapshot");
    const auto config = parse_config(config_json);
    const auto records = cogsec::read_audit_file(audit_path);
    auto result = cogsec::replay_audit(records, config.csm.repository);
    put(out_snapshot, result.repository.snapshot_text());
  });
}

cogsec_status cogsec_csm_create(const char* config_json, const char* state_dir, cogsec_csm** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    const auto config = parse_config(config_json);
    auto handle = std::make_unique<cogsec_csm>();
    handle->csm = std::make_unique<cogsec::Csm>(config.csm);
    if (state_dir) {
      const std::filesystem::path dir(state_dir);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) cogsec::fail(ErrorCode::Persistence, "cannot create " + dir.string() + ": " + ec.message());
      const auto audit = dir / "audit.jsonl";
      if (std::filesystem::exists(audit)) handle->csm->restore(cogsec::read_audit_file(audit, true));
      handle->csm->attach_audit_file(audit);
    }
    *out = handle.release();
  });
}

void cogsec_csm_destroy(cogsec_csm* csm) { delete csm; }

cogsec_status cogsec_csm_handle_event(cogsec_csm* csm, const char* event_json, char** out_outcome) {
  return guarded([&] {
    checked(csm);
    require(event_json, "event_json");
    require(out_outcome, "out_outcome");
    const auto event = cogsec::node_event_from_json(parse_document(event_json, "event"));
    put(out_outcome, cogsec::to_json(csm->csm->handle_event(event)));
  });
}

cogsec_status cogsec_csm_admin(cogsec_csm* csm, const char* action_json, char** out_record) {
  return guarded([&] {
    checked(csm);
    require(action_json, "action_json");
    require(out_record, "out_record");
    const auto action = cogsec::admin_action_from_json(parse_document(action_json, "admin action"));
    put(out_record, cogsec::to_json(csm->csm->apply_admin_action(action)));
  });
}

cogsec_status cogsec_csm_theta(cogsec_csm* csm, double* out_theta) {
  return guarded([&] {
    checked(csm);
    require(out_theta, "out_theta");
    *out_theta = csm->csm->theta();
  });
}

cogsec_status cogsec_csm_pending(cogsec_csm* csm, char** out_json) {
  return guarded([&] {
    checked(csm);
    require(out_json, "out_json");
    json doc = json::array();
    for (const auto& p : csm->csm->pending()) doc.push_back(cogsec::to_json(p));
    put(out_json, doc);
  });
}

cogsec_status cogsec_csm_nodes(cogsec_csm* csm, char** out_json) {
  return guarded([&] {
    checked(csm);
    require(out_json, "out_json");
    json doc = json::array();
    for (const auto& v : csm->csm->nodes()) doc.push_back(cogsec::to_json(v));
    put(out_json, doc);
  });
}

cogsec_status cogsec_csm_node(cogsec_csm* csm, const char* node_id, char** out_json) {
  return guarded([&] {
    checked(csm);
    require(node_id, "node_id");
    require(out_json, "out_json");
    auto view = csm->csm->node(node_id);
    if (!view) cogsec::fail(ErrorCode::NotFound, std::string("node ") + node_id + " is unknown");
    put(out_json, cogsec::to_json(*view));
  });
}

cogsec_status cogsec_csm_audit(cogsec_csm* csm, uint64_t since_seq, char** out_json) {
  return guarded([&] {
    checked(csm);
    require(out_json, "out_json");
    json doc = json::array();
    for (const auto& r : csm->csm->audit_log(since_seq)) doc.push_back(cogsec::to_json(r));
    put(out_json, doc);
  });
}

cogsec_status cogsec_csm_snapshot(cogsec_csm* csm, char** out_text) {
  return guarded([&] {
    checked(csm);
    require(out_text, "out_text");
    put(out_text, csm->csm->snapshot_text());
  });
}

}  // extern "C"
