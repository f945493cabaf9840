#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsamp/scheduler.hpp"

namespace rsamp::harness {

enum class DatasetKind { mnist, synthetic };

std::string_view dataset_name(DatasetKind kind) noexcept;

struct SyntheticOptions {
  std::size_t n = 2000;  // total samples before the train/holdout split
  std::size_t classes = 10;
  std::size_t dim = 32;
  double hardness = 0.1;
  double separation = 4.0;

  bool operator==(const SyntheticOptions&) const = default;
};

// Everything that determines a run. Defaults follow the MNIST setting:
// batch 64, learning rate 0.001, dropout keep 0.5, weight std 0.1.
struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::mnist;
  std::filesystem::path data_dir = "data/mnist-5k";
  std::size_t train_size = 1000;
  sampling::Variant scheduler = sampling::Variant::baseline;
  // Effective repetition rate: the fraction of a batch (M family) or of the
  // training set (E family) that is re-injected.
  double epsilon = 0.0;
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  double learning_rate = 0.001;
  double dropout_keep = 0.5;
  std::vector<std::size_t> hidden_sizes = {256};
  double init_std = 0.1;
  std::uint64_t seed = 1;
  std::optional<double> rho;  // enables per-epoch robust risk logging
  bool gcn = false;
  std::filesystem::path output_dir = "runs/latest";
  SyntheticOptions synthetic;

  bool operator==(const ExperimentConfig&) const = default;
};

struct SchedulerToken {
  sampling::Variant variant = sampling::Variant::baseline;
  std::optional<double> epsilon;  // set when the token carried a percentage
};

// "vr-m", "vr-m-15", "PVR-E-40", "baseline". The numeric suffix is a
// percentage: for VR-* it is the repetition rate itself (VR-M-15 -> 0.15);
// for PVR-* it is the size of the worst pool, half of which is re-injected
// (PVR-M-40 -> pool 0.40, epsilon 0.20). Throws UsageError naming the token.
SchedulerToken parse_scheduler_token(std::string_view token);

// Inverse of parse_scheduler_token: "Baseline", "VR-M-15", "PVR-M-40".
std::string scheduler_label(sampling::Variant variant, double epsilon);

// Throws UsageError on any out-of-range field.
void validate(const ExperimentConfig& config);

// defaults < --config file < flags. `args` excludes the program and
// subcommand names. A run manifest is accepted as a config file.
ExperimentConfig parse_config(const std::vector<std::string>& args);

// Structured form used by config files and run manifests.
std::string config_to_json(const ExperimentConfig& config, int indent = 2);
ExperimentConfig config_from_json(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base = {});

}  // namespace rsamp::harness
