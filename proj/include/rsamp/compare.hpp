#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rsamp/experiment.hpp"

namespace rsamp::harness {

struct ComparisonRow {
  std::string run;  // directory name
  std::string scheduler;
  double final_accuracy = 0.0;
  double delta = 0.0;  // final_accuracy - baseline_accuracy
  bool above_baseline = false;
};

struct Comparison {
  std::string baseline_run;
  double baseline_accuracy = 0.0;
  std::vector<ComparisonRow> rows;  // input order, baseline included
};

struct LoadedRun {
  std::filesystem::path dir;
  RunManifest manifest;
  std::vector<MetricsRow> metrics;
};

LoadedRun load_run(const std::filesystem::path& dir);

// The reference is the first baseline run in the list. Throws ArgumentError
// when fewer than two runs are given, no baseline is present, or runs differ
// in dataset or training size.
Comparison compare_runs(const std::vector<std::filesystem::path>& run_dirs);
Comparison compare_loaded(const std::vector<LoadedRun>& runs);

// "run,scheduler,final_accuracy,baseline_accuracy,delta_vs_baseline,above_baseline"
std::string comparison_csv(const Comparison& comparison);

// epoch column followed by one validation-accuracy column per run.
std::string accuracy_curves_csv(const std::vector<LoadedRun>& runs);

}  // namespace rsamp::harness
