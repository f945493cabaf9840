#include "rsamp/compare.hpp"

#include <algorithm>

#include "rsamp/errors.hpp"
#include "rsamp/outputs.hpp"

namespace rsamp::harness {

namespace fs = std::filesystem;

LoadedRun load_run(const fs::path& dir) {
  LoadedRun run;
  run.dir = dir;
  run.manifest = parse_manifest_json(read_text_file(dir / RunFiles::manifest));
  run.metrics = parse_metrics_csv(read_text_file(dir / RunFiles::metrics));
  return run;
}

Comparison compare_runs(const std::vector<fs::path>& run_dirs) {
  if (run_dirs.size() < 2) {
    throw ArgumentError("compare needs at least two run directories");
  }
  std::vector<LoadedRun> runs;
  runs.reserve(run_dirs.size());
  for (const auto& dir : run_dirs) {
    runs.push_back(load_run(dir));
  }
  return compare_loaded(runs);
}

Comparison compare_loaded(const std::vector<LoadedRun>& runs) {
  if (runs.size() < 2) {
    throw ArgumentError("compare needs at least two runs");
  }
  const auto& ref = runs.front().manifest.config;
  for (const auto& r : runs) {
    const auto& c = r.manifest.config;
    std::vector<std::string> diffs;
    if (c.dataset != ref.dataset) {
      diffs.push_back("dataset (" + std::string(dataset_name(ref.dataset)) + " vs " +
                      std::string(dataset_name(c.dataset)) + ")");
    }
    if (c.train_size != ref.train_size) {
      diffs.push_back("train_size (" + std::to_string(ref.train_size) + " vs " +
                      std::to_string(c.train_size) + ")");
    }
    if (!diffs.empty()) {
      std::string msg = "run " + r.dir.filename().string() + " is incompatible with " +
                        runs.front().dir.filename().string() + ":";
      for (const auto& d : diffs) {
        msg += " " + d;
      }
      throw ArgumentError(msg);
    }
  }

  const auto base = std::find_if(runs.begin(), runs.end(), [](const LoadedRun& r) {
    return r.manifest.config.scheduler == sampling::Variant::baseline;
  });
  if (base == runs.end()) {
    throw ArgumentError("compare needs a baseline run among the inputs");
  }

  Comparison out;
  out.baseline_run = base->dir.filename().string();
  out.baseline_accuracy = base->manifest.final_accuracy;
  for (const auto& r : runs) {
    ComparisonRow row;
    row.run = r.dir.filename().string();
    row.scheduler = r.manifest.label;
    row.final_accuracy = r.manifest.final_accuracy;
    row.delta = row.final_accuracy - out.baseline_accuracy;
    row.above_baseline = row.delta > 0.0;
    out.rows.push_back(row);
  }
  return out;
}

std::string comparison_csv(const Comparison& cmp) {
  std::string out =
      "run,scheduler,final_accuracy,baseline_accuracy,delta_vs_baseline,above_baseline\n";
  for (const auto& r : cmp.rows) {
    out += r.run + "," + r.scheduler + "," + format_real(r.final_accuracy) + "," +
           format_real(cmp.baseline_accuracy) + "," + format_real(r.delta) + "," +
           (r.above_baseline ? "yes" : "no") + "\n";
  }
  return out;
}

std::string accuracy_curves_csv(const std::vector<LoadedRun>& runs) {
  std::string out = "epoch";
  std::size_t longest = 0;
  for (const auto& r : runs) {
    out += "," + r.dir.filename().string();
    longest = std::max(longest, r.metrics.size());
  }
  out += "\n";
  for (std::size_t e = 0; e < longest; ++e) {
    out += std::to_string(e + 1);
    for (const auto& r : runs) {
      out += ",";
      if (e < r.metrics.size()) {
        out += format_real(r.metrics[e].validation_accuracy);
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace rsamp::harness
