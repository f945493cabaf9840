#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rsamp/experiment.hpp"
#include "rsamp/ledger.hpp"

namespace rsamp::harness {

// Shortest-free fixed format: 9 significant digits, '.' decimal point,
// independent of the C++ locale.
std::string format_real(double value);

// "epoch,mean_train_loss,validation_accuracy,robust_risk,wall_seconds"
// rows; robust_risk is empty when disabled. LF line endings.
std::string metrics_csv(const std::vector<MetricsRow>& rows);
// "usage_count,num_samples" rows ascending by usage_count.
std::string histogram_csv(const sampling::RepetitionHistogram& hist);
// "sample_id,usage_count,last_loss" rows; last_loss empty if never scored.
std::string ledger_csv(const sampling::SampleLedger& ledger);
std::string manifest_json(const RunManifest& manifest);

std::vector<MetricsRow> parse_metrics_csv(const std::string& text);
sampling::SampleLedger parse_ledger_csv(const std::string& text);
RunManifest parse_manifest_json(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

struct RunFiles {
  static constexpr const char* metrics = "metrics.csv";
  static constexpr const char* histogram = "histogram.csv";
  static constexpr const char* ledger = "ledger.csv";
  static constexpr const char* manifest = "manifest.json";
};

// Writes metrics.csv, histogram.csv, ledger.csv and manifest.json into
// output_dir, creating it if needed. Throws IoError when unwritable.
void emit_outputs(const std::vector<MetricsRow>& metrics, const sampling::SampleLedger& ledger,
                  const RunManifest& manifest, const std::filesystem::path& output_dir);

}  // namespace rsamp::harness
