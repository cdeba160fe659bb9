#include "cogsec/config.hpp"

#include <fstream>
#include <sstream>

#include "cogsec/error.hpp"

namespace cogsec {

CsmConfig AppConfig::default_csm() {
  CsmConfig c;
  c.generator.training.iterations = 2000;
  c.policy.training.iterations = 500;
  // Served CSMs wait for the operator; headless runs switch to auto-approval.
  c.admin.mode = AdminPolicy::Mode::Interactive;
  return c;
}

void AppConfig::validate() const {
  csm.validate();
  sim.validate();
  const auto& e = experiments;
  if (e.seeds.empty()) fail(ErrorCode::Config, "experiments.seeds must not be empty");
  if (e.training_set_sizes.empty()) fail(ErrorCode::Config, "experiments.training_set_sizes must not be empty");
  if (e.neuron_range.empty()) fail(ErrorCode::Config, "experiments.neuron_range must not be empty");
  if (e.lr_values.empty() || e.iteration_values.empty()) fail(ErrorCode::Config, "experiments lr/iteration grid is empty");
  for (double lr : e.lr_values) {
    if (!(lr > 0.0)) fail(ErrorCode::Config, "experiments.lr_values must be positive");
  }
  for (std::size_t it : e.iteration_values) {
    if (it < 1) fail(ErrorCode::Config, "experiments.iteration_values must be at least 1");
  }
  for (std::size_t d : e.neuron_range) {
    if (d < 1) fail(ErrorCode::Config, "experiments.neuron_range entries must be at least 1");
  }
  if (e.sweep_input_dim < 1) fail(ErrorCode::Config, "experiments.sweep_input_dim must be at least 1");
  e.sweep_training.validate();
  if (server.port < 0 || server.port > 65535) fail(ErrorCode::Config, "server.port must lie in [0, 65535]");
}

nlohmann::json to_json(const AppConfig& c) {
  const auto& e = c.experiments;
  return {{"csm", to_json(c.csm)},
          {"sim", sim::to_json(c.sim)},
          {"experiments",
           {{"seeds", e.seeds},
            {"detect_training_set_size", e.detect_training_set_size},
            {"training_set_sizes", e.training_set_sizes},
            {"neuron_range", e.neuron_range},
            {"lr_values", e.lr_values},
            {"iteration_values", e.iteration_values},
            {"sweep_input_dim", e.sweep_input_dim},
            {"sweep_task", sim::to_json(e.sweep_task)},
            {"sweep_training", mlp::to_json(e.sweep_training)}}},
          {"server", {{"bind", c.server.bind}, {"port", c.server.port}, {"state_dir", c.server.state_dir.string()}}}};
}

AppConfig app_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) fail(ErrorCode::Config, "configuration must be a JSON object");
  AppConfig c;
  try {
    if (doc.contains("csm")) {
      // Sections merge over the application defaults, not the bare library ones.
      nlohmann::json merged = to_json(c.csm);
      merged.merge_patch(doc.at("csm"));
      c.csm = csm_config_from_json(merged);
    }
    if (doc.contains("sim")) c.sim = sim::sim_config_from_json(doc.at("sim"));
    if (doc.contains("experiments")) {
      const auto& j = doc.at("experiments");
      auto& e = c.experiments;
      e.seeds = j.value("seeds", e.seeds);
      e.detect_training_set_size = j.value("detect_training_set_size", e.detect_training_set_size);
      e.training_set_sizes = j.value("training_set_sizes", e.training_set_sizes);
      e.neuron_range = j.value("neuron_range", e.neuron_range);
      e.lr_values = j.value("lr_values", e.lr_values);
      e.iteration_values = j.value("iteration_values", e.iteration_values);
      e.sweep_input_dim = j.value("sweep_input_dim", e.sweep_input_dim);
      if (j.contains("sweep_task")) e.sweep_task = sim::sweep_task_from_json(j.at("sweep_task"));
      if (j.contains("sweep_training")) {
        e.sweep_training = mlp::training_config_from_json(j.at("sweep_training"), e.sweep_training);
      }
    }
    if (doc.contains("server")) {
      const auto& j = doc.at("server");
      c.server.bind = j.value("bind", c.server.bind);
      c.server.port = j.value("port", c.server.port);
      c.server.state_dir = j.value("state_dir", c.server.state_dir.string());
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::Config, std::string("malformed configuration: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::Config) throw;
    fail(ErrorCode::Config, ex.what());
  }
  try {
    c.validate();
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::Config) throw;
    fail(ErrorCode::Config, ex.what());
  }
  return c;
}

AppConfig load_app_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::Config, "cannot read configuration file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto doc = nlohmann::json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::Config, "configuration file " + file.string() + " is not valid JSON");
  return app_config_from_json(doc);
}

}  // namespace cogsec
