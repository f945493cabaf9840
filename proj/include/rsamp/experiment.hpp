#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsamp/config.hpp"
#include "rsamp/dataset.hpp"
#include "rsamp/ledger.hpp"
#include "rsamp/mlp.hpp"
#include "rsamp/scheduler.hpp"

namespace rsamp::harness {

struct MetricsRow {
  std::size_t epoch = 0;
  double mean_train_loss = 0.0;
  double validation_accuracy = 0.0;
  std::optional<double> robust_risk;
  double wall_seconds = 0.0;
};

struct RunManifest {
  ExperimentConfig config;
  std::string code_version;
  std::string label;  // e.g. "VR-M-15"
  std::uint64_t dataset_checksum = 0;
  std::size_t train_samples = 0;
  std::size_t validation_samples = 0;
  double final_accuracy = 0.0;
  std::uint64_t total_usage = 0;       // sum of ledger usage counts
  std::uint64_t reinjected_slots = 0;  // slots filled by re-injected duplicates
};

struct PreparedData {
  data::Dataset train;
  data::Dataset validation;
};

// Loads or generates the dataset and splits off the training subset. The
// holdout (plus the test files when present) becomes the validation set.
PreparedData prepare_data(const ExperimentConfig& config);

struct BatchEvent {
  std::size_t epoch = 0;  // 1-based
  std::size_t batch = 0;  // 1-based within the epoch
  const sampling::MiniBatchPlan& plan;
  std::span<const double> losses;  // pre-update, aligned with plan.ids
};

struct RunHooks {
  std::function<void(const BatchEvent&)> on_batch;
  std::function<void(const MetricsRow&)> on_epoch;
};

struct RunResult {
  std::vector<MetricsRow> metrics;
  sampling::SampleLedger ledger;
  RunManifest manifest;
  nn::ModelParams model;
};

std::string code_version();

// Runs the selected scheduler end to end. Throws DivergenceError with the
// epoch/batch coordinates if a loss or parameter turns non-finite.
RunResult run_experiment(const ExperimentConfig& config, const RunHooks& hooks = {});
RunResult run_experiment(const ExperimentConfig& config, const PreparedData& data,
                         const RunHooks& hooks = {});

}  // namespace rsamp::harness
