#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "rsamp/compare.hpp"
#include "rsamp/config.hpp"
#include "rsamp/errors.hpp"
#include "rsamp/experiment.hpp"
#include "rsamp/outputs.hpp"

namespace fs = std::filesystem;
using namespace rsamp;
using namespace rsamp::harness;

namespace {

constexpr const char* kUsage =
    "usage: rsamp <command> [options]\n"
    "\n"
    "commands:\n"
    "  train      run one scheduler configuration and write its outputs\n"
    "  compare    tabulate final accuracies of finished runs against a baseline\n"
    "  histogram  print the repetition histogram of a finished run\n"
    "\n"
    "rsamp <command> --help lists the options of a command.\n";

bool wants_help(const std::vector<std::string>& args) {
  return std::any_of(args.begin(), args.end(),
                     [](const std::string& a) { return a == "-h" || a == "--help"; });
}

int cmd_train(const std::vector<std::string>& args) {
  if (wants_help(args)) {
    try {
      parse_config(args);
    } catch (const UsageError& e) {
      std::cout << e.what();
    }
    return 0;
  }
  const ExperimentConfig config = parse_config(args);
  RunHooks hooks;
  hooks.on_epoch = [&](const MetricsRow& row) {
    std::cerr << "epoch " << row.epoch << "/" << config.epochs
              << " loss " << format_real(row.mean_train_loss)
              << " accuracy " << format_real(row.validation_accuracy) << "\n";
  };
  const RunResult result = run_experiment(config, hooks);
  emit_outputs(result.metrics, result.ledger, result.manifest, config.output_dir);
  std::cout << result.manifest.label << " final_accuracy "
            << format_real(result.manifest.final_accuracy) << " -> "
            << config.output_dir.string() << "\n";
  return 0;
}

int parse_sub(CLI::App& app, const std::vector<std::string>& args) {
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string("invalid arguments: ") + e.what());
  }
  return -1;
}

int cmd_compare(const std::vector<std::string>& args) {
  CLI::App app{"compare finished runs against the first baseline run", "rsamp compare"};
  std::vector<std::string> dirs;
  std::string out, curves;
  app.add_option("runs", dirs, "run directories (at least two, one of them a baseline)")
      ->required();
  app.add_option("--out", out, "also write the table to this file");
  app.add_option("--curves", curves, "write per-epoch accuracy curves to this CSV file");
  if (const int rc = parse_sub(app, args); rc >= 0) {
    return rc;
  }

  std::vector<LoadedRun> runs;
  for (const auto& d : dirs) {
    runs.push_back(load_run(d));
  }
  const std::string table = comparison_csv(compare_loaded(runs));
  std::cout << table;
  if (!out.empty()) {
    write_text_file(out, table);
  }
  if (!curves.empty()) {
    write_text_file(curves, accuracy_curves_csv(runs));
  }
  return 0;
}

int cmd_histogram(const std::vector<std::string>& args) {
  CLI::App app{"print the repetition histogram of a run", "rsamp histogram"};
  std::string target, out;
  app.add_option("run", target, "run directory or ledger.csv path")->required();
  app.add_option("--out", out, "also write the histogram to this file");
  if (const int rc = parse_sub(app, args); rc >= 0) {
    return rc;
  }
  fs::path ledger_path = target;
  if (fs::is_directory(ledger_path)) {
    ledger_path /= RunFiles::ledger;
  }
  const auto ledger = parse_ledger_csv(read_text_file(ledger_path));
  const std::string text = histogram_csv(sampling::repetition_histogram(ledger));
  std::cout << text;
  if (!out.empty()) {
    write_text_file(out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << kUsage;
    return 2;
  }
  const std::string command = argv[1];
  const std::vector<std::string> args(argv + 2, argv + argc);
  try {
    if (command == "train") {
      return cmd_train(args);
    }
    if (command == "compare") {
      return cmd_compare(args);
    }
    if (command == "histogram") {
      return cmd_histogram(args);
    }
    if (command == "-h" || command == "--help" || command == "help") {
      std::cout << kUsage;
      return 0;
    }
    std::cerr << "unknown command '" << command << "'\n" << kUsage;
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "rsamp: " << e.what() << "\n";
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "rsamp: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "rsamp: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "rsamp: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "rsamp: " << e.what() << "\n";
    return 1;
  }
}
