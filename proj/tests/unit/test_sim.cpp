#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cogsec/error.hpp"
#include "cogsec/sim.hpp"

using namespace cogsec;
using namespace cogsec::sim;

namespace {

SimConfig small_sim(std::uint64_t seed = 3) {
  SimConfig s;
  s.node_count = 10;
  s.ap_count = 2;
  s.epochs = 20;
  s.seed = seed;
  s.calibration_epochs = 5;
  s.deviation_epochs = 3;
  s.deviation.onset_epoch = 15;
  return s;
}

CsmConfig fast_csm() {
  CsmConfig c;
  c.generator.training.iterations = 300;
  c.policy.training.iterations = 200;
  return c;
}

}  // namespace

TEST(Trace, DeterministicPerSeed) {
  std::ostringstream a, b, c;
  write_trace(a, generate_trace(small_sim(3)));
  write_trace(b, generate_trace(small_sim(3)));
  write_trace(c, generate_trace(small_sim(4)));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(Trace, ShapeAndMaliciousShare) {
  auto cfg = small_sim();
  auto t = generate_trace(cfg);
  ASSERT_EQ(t.entries.size(), cfg.node_count * cfg.epochs);
  ASSERT_EQ(t.padls.size(), cfg.node_count);
  std::size_t malicious = 0;
  for (bool m : t.malicious) malicious += m ? 1 : 0;
  EXPECT_EQ(malicious, 2u);  // round(0.2 * 10)
  for (const auto& e : t.entries) {
    EXPECT_EQ(e.event.padl.digest(), t.padls[e.node_index].digest());
    EXPECT_EQ(e.event.activity.window_start, static_cast<Timestamp>(e.epoch) * cfg.window_ms);
    EXPECT_EQ(e.shifted, e.malicious && e.epoch >= cfg.deviation.onset_epoch);
    e.event.activity.validate();
  }
}

TEST(Trace, ZeroStddevGivesConstantWindowsPerNode) {
  auto cfg = small_sim();
  cfg.deviation.malicious_fraction = 0.0;
  for (auto& c : cfg.classes) c.stddev.fill(0.0);
  auto t = generate_trace(cfg);
  for (const auto& e : t.entries) {
    const auto& first = t.entries[e.node_index].event.activity;
    EXPECT_EQ(e.event.activity.usage(Service::DataServer), first.usage(Service::DataServer));
    EXPECT_EQ(e.event.activity.failed_auth_count, first.failed_auth_count);
    EXPECT_FALSE(e.shifted);
  }
}

TEST(Trace, JsonLinesRoundTrip) {
  auto t = generate_trace(small_sim());
  std::stringstream s;
  write_trace(s, t);
  auto back = read_trace(s);
  ASSERT_EQ(back.entries.size(), t.entries.size());
  std::stringstream again;
  write_trace(again, back);
  EXPECT_EQ(again.str(), s.str());
  EXPECT_EQ(back.malicious, t.malicious);
}

TEST(SimConfig, ValidationAndJson) {
  auto cfg = small_sim();
  auto back = sim_config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
  cfg.node_count = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = small_sim();
  cfg.deviation.malicious_fraction = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Detection, SmallExperimentMetricsAreConsistent) {
  auto m = run_detection_experiment(small_sim(), fast_csm(), 5);
  EXPECT_EQ(m.training_set_size, 5u);
  EXPECT_EQ(m.injected_malicious, 2u);
  EXPECT_LE(m.detected_malicious, m.injected_malicious);
  EXPECT_DOUBLE_EQ(m.detection_rate, static_cast<double>(m.detected_malicious) / 2.0);
  EXPECT_DOUBLE_EQ(m.false_positive_rate, static_cast<double>(m.false_positive_nodes) / 8.0);
  ASSERT_EQ(m.detection_curve.size(), 3u);
  for (std::size_t i = 1; i < m.detection_curve.size(); ++i) {
    EXPECT_GE(m.detection_curve[i], m.detection_curve[i - 1]);
  }
  EXPECT_DOUBLE_EQ(m.detection_curve.back(), m.detection_rate);
  auto again = run_detection_experiment(small_sim(), fast_csm(), 5);
  EXPECT_EQ(again.detected_malicious, m.detected_malicious);
  EXPECT_EQ(again.false_positive_nodes, m.false_positive_nodes);
}

TEST(Detection, ZeroInjectedReportsFullDetectionByConvention) {
  auto cfg = small_sim();
  cfg.deviation.malicious_fraction = 0.0;
  auto m = run_detection_experiment(cfg, fast_csm(), 5);
  EXPECT_TRUE(m.zero_injected);
  EXPECT_EQ(m.injected_malicious, 0u);
  EXPECT_EQ(m.detection_rate, 1.0);
}

TEST(Detection, RejectsOversizedTrainingSet) {
  auto cfg = small_sim();
  EXPECT_THROW(run_detection_experiment(cfg, fast_csm(), 0), Error);
  EXPECT_THROW(run_detection_experiment(cfg, fast_csm(), 13), Error);  // 5 + 13 + 3 > 20
  auto csm = fast_csm();
  csm.repository.history_capacity = 4;
  EXPECT_THROW(run_detection_experiment(cfg, csm, 5), Error);
}

TEST(Simulation, AuditReplaysToFinalSnapshot) {
  auto run = run_simulation(small_sim(), fast_csm());
  EXPECT_EQ(run.summary.at("events").get<std::size_t>(), 200u);
  auto replayed = replay_audit(run.audit, RepositoryOptions{});
  EXPECT_EQ(replayed.repository.snapshot_text(), run.snapshot_text);
  EXPECT_EQ(run_simulation(small_sim(), fast_csm()).snapshot_text, run.snapshot_text);
}

TEST(SweepTask, DataIsDeterministicAndShaped) {
  SweepTask task;
  auto a = make_task_data(task, 25);
  auto b = make_task_data(task, 25);
  ASSERT_EQ(a.train.size(), task.train_samples);
  ASSERT_EQ(a.test.size(), task.test_samples);
  EXPECT_EQ(a.train[0].input.size(), 25u);
  EXPECT_EQ(a.train[0].target.size(), task.outputs);
  EXPECT_EQ(a.train[3].input, b.train[3].input);
  // Narrower widths see a prefix of the same latent features.
  auto narrow = make_task_data(task, 5);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(narrow.train[0].input[i], a.train[0].input[i]);
  EXPECT_EQ(narrow.train[0].target, a.train[0].target);
}

TEST(Sweeps, IncrementalGridMatchesIndependentRuns) {
  SweepTask task;
  task.train_samples = 20;
  task.test_samples = 20;
  mlp::TrainingConfig training;
  training.seed = 2;
  const std::vector<double> lrs{0.2, 0.5};
  const std::vector<std::size_t> iters{10, 30};
  auto grid = sweep_lr_iterations(lrs, iters, task, training, 8);
  ASSERT_EQ(grid.size(), 4u);
  EXPECT_EQ(grid[1].learning_rate, 0.2);
  EXPECT_EQ(grid[1].iterations, 30u);
  for (const auto& cell : grid) {
    const std::vector<double> one_lr{cell.learning_rate};
    const std::vector<std::size_t> one_iter{cell.iterations};
    auto single = sweep_lr_iterations(one_lr, one_iter, task, training, 8);
    EXPECT_EQ(single[0].train_error, cell.train_error);
    EXPECT_EQ(single[0].test_error, cell.test_error);
  }
}

TEST(Sweeps, NeuronSweepCoversEveryWidth) {
  SweepTask task;
  task.train_samples = 20;
  task.test_samples = 20;
  mlp::TrainingConfig training;
  training.iterations = 20;
  const std::vector<std::size_t> dims{5, 10, 30};
  auto rows = sweep_input_neurons(dims, task, training);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].inputs, dims[i]);
    EXPECT_TRUE(std::isfinite(rows[i].train_error));
    EXPECT_TRUE(std::isfinite(rows[i].test_error));
  }
  EXPECT_EQ(sweep_input_neurons(dims, task, training)[2].test_error, rows[2].test_error);
}
