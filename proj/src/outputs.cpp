#include "rsamp/outputs.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rsamp/errors.hpp"

namespace rsamp::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) {
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == sep) {
    out.emplace_back();
  }
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (!line.empty()) {
      out.push_back(line);
    }
  }
  return out;
}

double parse_real(const std::string& cell) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw FormatError("not a number: '" + cell + "'");
  }
  return v;
}

std::uint64_t parse_count(const std::string& cell) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw FormatError("not a count: '" + cell + "'");
  }
  return v;
}

constexpr const char* kMetricsHeader =
    "epoch,mean_train_loss,validation_accuracy,robust_risk,wall_seconds";

}  // namespace

std::string format_real(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.epoch) + "," + format_real(r.mean_train_loss) + "," +
           format_real(r.validation_accuracy) + "," +
           (r.robust_risk ? format_real(*r.robust_risk) : std::string()) + "," +
           format_real(r.wall_seconds) + "\n";
  }
  return out;
}

std::string histogram_csv(const sampling::RepetitionHistogram& hist) {
  std::string out = "usage_count,num_samples\n";
  for (const auto& [count, samples] : hist) {
    out += std::to_string(count) + "," + std::to_string(samples) + "\n";
  }
  return out;
}

std::string ledger_csv(const sampling::SampleLedger& ledger) {
  std::string out = "sample_id,usage_count,last_loss\n";
  for (std::size_t id = 0; id < ledger.size(); ++id) {
    const auto sid = static_cast<sampling::SampleId>(id);
    const auto loss = ledger.last_loss(sid);
    out += std::to_string(id) + "," + std::to_string(ledger.usage(sid)) + "," +
           (loss ? format_real(*loss) : std::string()) + "\n";
  }
  return out;
}

std::string manifest_json(const RunManifest& m) {
  json j;
  j["config"] = json::parse(config_to_json(m.config));
  j["code_version"] = m.code_version;
  j["label"] = m.label;
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(m.dataset_checksum));
  j["dataset_checksum"] = hex;
  j["train_samples"] = m.train_samples;
  j["validation_samples"] = m.validation_samples;
  j["final_accuracy"] = m.final_accuracy;
  j["total_usage"] = m.total_usage;
  j["reinjected_slots"] = m.reinjected_slots;
  return j.dump(2) + "\n";
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kMetricsHeader) {
    throw FormatError("metrics file lacks the expected header");
  }
  std::vector<MetricsRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != 5) {
      throw FormatError("metrics row " + std::to_string(i) + " has " + std::to_string(cells.size()) +
                        " cells");
    }
    MetricsRow r;
    r.epoch = static_cast<std::size_t>(parse_count(cells[0]));
    r.mean_train_loss = parse_real(cells[1]);
    r.validation_accuracy = parse_real(cells[2]);
    if (!cells[3].empty()) {
      r.robust_risk = parse_real(cells[3]);
    }
    r.wall_seconds = parse_real(cells[4]);
    rows.push_back(r);
  }
  return rows;
}

sampling::SampleLedger parse_ledger_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != "sample_id,usage_count,last_loss") {
    throw FormatError("ledger file lacks the expected header");
  }
  sampling::SampleLedger ledger(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != 3) {
      throw FormatError("ledger row " + std::to_string(i) + " is malformed");
    }
    const auto id = parse_count(cells[0]);
    if (id >= ledger.size()) {
      throw FormatError("ledger id " + cells[0] + " out of range");
    }
    ledger.restore(static_cast<sampling::SampleId>(id), parse_count(cells[1]),
                   cells[2].empty() ? std::nullopt : std::optional<double>(parse_real(cells[2])));
  }
  return ledger;
}

RunManifest parse_manifest_json(const std::string& text) {
  RunManifest m;
  try {
    const json j = json::parse(text);
    m.config = config_from_json(text);
    m.code_version = j.value("code_version", "");
    m.label = j.value("label", "");
    m.dataset_checksum = std::stoull(j.value("dataset_checksum", "0"), nullptr, 16);
    m.train_samples = j.value("train_samples", std::size_t{0});
    m.validation_samples = j.value("validation_samples", std::size_t{0});
    m.final_accuracy = j.at("final_accuracy").get<double>();
    m.total_usage = j.value("total_usage", std::uint64_t{0});
    m.reinjected_slots = j.value("reinjected_slots", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  } catch (const std::logic_error& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
}

void emit_outputs(const std::vector<MetricsRow>& metrics, const sampling::SampleLedger& ledger,
                  const RunManifest& manifest, const fs::path& output_dir) {
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec || !fs::is_directory(output_dir)) {
    throw IoError("cannot create output directory " + output_dir.string() +
                  (ec ? ": " + ec.message() : std::string()));
  }
  write_text_file(output_dir / RunFiles::metrics, metrics_csv(metrics));
  write_text_file(output_dir / RunFiles::histogram,
                  histogram_csv(sampling::repetition_histogram(ledger)));
  write_text_file(output_dir / RunFiles::ledger, ledger_csv(ledger));
  write_text_file(output_dir / RunFiles::manifest, manifest_json(manifest));
}

}  // namespace rsamp::harness
