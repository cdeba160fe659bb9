#pragma once

// One configuration document drives the CLI, the experiments and the admin
// server. Every section is optional; absent keys keep their defaults.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogsec/csm.hpp"
#include "cogsec/sim.hpp"

namespace cogsec {

struct ExperimentConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t detect_training_set_size = 50;
  std::vector<std::size_t> training_set_sizes{5, 10, 20, 50};
  std::vector<std::size_t> neuron_range{5, 10, 15, 20, 25, 30};
  std::vector<double> lr_values{0.05, 0.2, 0.5, 0.9};
  std::vector<std::size_t> iteration_values{1000, 5000, 10000, 20000};
  std::size_t sweep_input_dim = 20;
  sim::SweepTask sweep_task{};
  mlp::TrainingConfig sweep_training{};
};

struct ServerConfig {
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::filesystem::path state_dir = "state";
};

struct AppConfig {
  CsmConfig csm = default_csm();
  sim::SimConfig sim{};
  ExperimentConfig experiments{};
  ServerConfig server{};

  // CSM defaults used by the experiments: the per-node networks retrain
  // often, so their pass budgets are below the single-network default.
  static CsmConfig default_csm();
  void validate() const;
};

nlohmann::json to_json(const AppConfig& config);
// Throws Config on malformed or invalid documents.
AppConfig app_config_from_json(const nlohmann::json& doc);
AppConfig load_app_config(const std::filesystem::path& file);

}  // namespace cogsec
