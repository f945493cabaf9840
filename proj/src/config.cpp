#include "rsamp/config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rsamp/errors.hpp"

namespace rsamp::harness {

using nlohmann::json;
using sampling::Variant;

std::string_view dataset_name(DatasetKind kind) noexcept {
  return kind == DatasetKind::mnist ? "mnist" : "synthetic";
}

namespace {

DatasetKind parse_dataset(std::string_view name) {
  if (name == "mnist") {
    return DatasetKind::mnist;
  }
  if (name == "synthetic") {
    return DatasetKind::synthetic;
  }
  throw UsageError("unknown dataset '" + std::string(name) + "' (expected mnist or synthetic)");
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// "15" -> 15.0, "7.5" -> 7.5; anything else is rejected.
std::optional<double> parse_percent(std::string_view digits) {
  if (digits.empty()) {
    return std::nullopt;
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string format_percent(double percent) {
  const double rounded = std::round(percent);
  if (std::abs(percent - rounded) < 1e-9) {
    return std::to_string(static_cast<long long>(rounded));
  }
  std::ostringstream os;
  os << percent;
  return os.str();
}

}  // namespace

SchedulerToken parse_scheduler_token(std::string_view token) {
  const std::string lower = lowercase(token);
  if (auto v = sampling::parse_variant(lower)) {
    return {*v, std::nullopt};
  }
  const auto dash = lower.rfind('-');
  if (dash != std::string::npos) {
    const auto v = sampling::parse_variant(std::string_view(lower).substr(0, dash));
    const auto pct = parse_percent(std::string_view(lower).substr(dash + 1));
    if (v && *v != Variant::baseline && pct) {
      if (!(*pct >= 0.0 && *pct < 100.0)) {
        throw UsageError("scheduler token '" + std::string(token) +
                         "': percentage must lie in [0, 100)");
      }
      const double fraction = *pct / 100.0;
      return {*v, sampling::is_probabilistic(*v) ? fraction / 2.0 : fraction};
    }
  }
  throw UsageError("unknown scheduler '" + std::string(token) +
                   "' (expected baseline, vr-m, vr-e, pvr-m, pvr-e, optionally with a -NN suffix)");
}

std::string scheduler_label(Variant variant, double epsilon) {
  if (variant == Variant::baseline) {
    return "Baseline";
  }
  std::string name(sampling::variant_name(variant));
  for (char& c : name) {
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  const double percent = 100.0 * (sampling::is_probabilistic(variant) ? 2.0 * epsilon : epsilon);
  return name + "-" + format_percent(percent);
}

void validate(const ExperimentConfig& c) {
  const auto fail = [](const std::string& msg) { throw UsageError(msg); };
  if (!(c.epsilon >= 0.0 && c.epsilon < 1.0)) {
    fail("epsilon must lie in [0, 1), got " + std::to_string(c.epsilon));
  }
  if (c.scheduler == Variant::baseline && c.epsilon != 0.0) {
    fail("the baseline scheduler takes no epsilon");
  }
  if (sampling::is_probabilistic(c.scheduler) && !(2.0 * c.epsilon < 1.0)) {
    fail("probabilistic schedulers need a worst pool 2*epsilon below 1, got epsilon " +
         std::to_string(c.epsilon));
  }
  if (c.train_size == 0) {
    fail("train_size must be positive");
  }
  if (c.batch_size == 0 || c.batch_size > c.train_size) {
    fail("batch_size must lie in [1, train_size], got " + std::to_string(c.batch_size));
  }
  if (c.epochs == 0) {
    fail("epochs must be positive");
  }
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    fail("learning rate must be positive");
  }
  if (!(c.dropout_keep > 0.0 && c.dropout_keep <= 1.0)) {
    fail("dropout_keep must lie in (0, 1], got " + std::to_string(c.dropout_keep));
  }
  for (const auto h : c.hidden_sizes) {
    if (h == 0) {
      fail("hidden layer sizes must be positive");
    }
  }
  if (!(c.init_std >= 0.0) || !std::isfinite(c.init_std)) {
    fail("init_std must be non-negative");
  }
  if (c.rho && !(*c.rho >= 0.0 && std::isfinite(*c.rho))) {
    fail("rho must be non-negative");
  }
  if (c.dataset == DatasetKind::synthetic) {
    const auto& s = c.synthetic;
    if (s.classes < 2 || s.dim == 0 || s.n < s.classes) {
      fail("synthetic dataset needs classes >= 2, dim >= 1 and n >= classes");
    }
    if (!(s.hardness >= 0.0 && s.hardness < 1.0)) {
      fail("synthetic hardness must lie in [0, 1)");
    }
    if (c.train_size > s.n) {
      fail("train_size exceeds the synthetic sample count");
    }
  }
}

std::string config_to_json(const ExperimentConfig& c, int indent) {
  json j;
  j["dataset"] = dataset_name(c.dataset);
  j["data_dir"] = c.data_dir.generic_string();
  j["train_size"] = c.train_size;
  j["scheduler"] = sampling::variant_name(c.scheduler);
  j["epsilon"] = c.epsilon;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["lr"] = c.learning_rate;
  j["dropout_keep"] = c.dropout_keep;
  j["hidden"] = c.hidden_sizes;
  j["init_std"] = c.init_std;
  j["seed"] = c.seed;
  j["rho"] = c.rho ? json(*c.rho) : json(nullptr);
  j["gcn"] = c.gcn;
  j["out"] = c.output_dir.generic_string();
  j["synthetic"] = {{"n", c.synthetic.n},
                    {"classes", c.synthetic.classes},
                    {"dim", c.synthetic.dim},
                    {"hardness", c.synthetic.hardness},
                    {"separation", c.synthetic.separation}};
  return j.dump(indent);
}

ExperimentConfig config_from_json(std::string_view text, ExperimentConfig c) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config file is not valid JSON: ") + e.what());
  }
  // Manifests wrap the config in a "config" member.
  const json& j = root.contains("config") ? root.at("config") : root;
  if (!j.is_object()) {
    throw UsageError("config file must hold a JSON object");
  }
  try {
    if (j.contains("dataset")) c.dataset = parse_dataset(j.at("dataset").get<std::string>());
    if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
    if (j.contains("train_size")) c.train_size = j.at("train_size").get<std::size_t>();
    if (j.contains("scheduler")) {
      const auto tok = parse_scheduler_token(j.at("scheduler").get<std::string>());
      c.scheduler = tok.variant;
      c.epsilon = tok.epsilon.value_or(0.0);
    }
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("lr")) c.learning_rate = j.at("lr").get<double>();
    if (j.contains("dropout_keep")) c.dropout_keep = j.at("dropout_keep").get<double>();
    if (j.contains("hidden")) c.hidden_sizes = j.at("hidden").get<std::vector<std::size_t>>();
    if (j.contains("init_std")) c.init_std = j.at("init_std").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("rho")) {
      c.rho = j.at("rho").is_null() ? std::nullopt : std::optional<double>(j.at("rho").get<double>());
    }
    if (j.contains("gcn")) c.gcn = j.at("gcn").get<bool>();
    if (j.contains("out")) c.output_dir = j.at("out").get<std::string>();
    if (j.contains("synthetic")) {
      const json& s = j.at("synthetic");
      if (s.contains("n")) c.synthetic.n = s.at("n").get<std::size_t>();
      if (s.contains("classes")) c.synthetic.classes = s.at("classes").get<std::size_t>();
      if (s.contains("dim")) c.synthetic.dim = s.at("dim").get<std::size_t>();
      if (s.contains("hardness")) c.synthetic.hardness = s.at("hardness").get<double>();
      if (s.contains("separation")) c.synthetic.separation = s.at("separation").get<double>();
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str(), std::move(base));
}

ExperimentConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"train one scheduler configuration", "rsamp train"};
  std::string config_path, dataset, scheduler, hidden, data_dir, out;
  std::size_t train_size = 0, epochs = 0, batch_size = 0;
  std::size_t syn_n = 0, syn_classes = 0, syn_dim = 0;
  double epsilon = 0, lr = 0, keep = 0, init_std = 0, rho = 0, syn_hard = 0, syn_sep = 0;
  std::uint64_t seed = 0;
  bool gcn = false;

  auto* o_config = app.add_option("--config", config_path, "JSON config file or run manifest");
  auto* o_dataset = app.add_option("--dataset", dataset, "mnist | synthetic");
  auto* o_data_dir = app.add_option("--data-dir", data_dir, "directory holding the IDX files");
  auto* o_train = app.add_option("--train-size", train_size, "training samples kept");
  auto* o_sched = app.add_option(
      "--scheduler", scheduler,
      "baseline | vr-m | vr-e | pvr-m | pvr-e, optionally with a percentage suffix "
      "(vr-m-15 -> epsilon 0.15; pvr-m-40 -> worst pool 40%, half of it re-injected)");
  auto* o_eps = app.add_option("--epsilon", epsilon, "effective repetition rate in [0, 1)");
  auto* o_epochs = app.add_option("--epochs", epochs);
  auto* o_batch = app.add_option("--batch-size", batch_size);
  auto* o_lr = app.add_option("--lr", lr, "learning rate");
  auto* o_keep = app.add_option("--dropout-keep", keep, "keep probability, 1 disables dropout");
  auto* o_hidden = app.add_option("--hidden", hidden, "comma-separated hidden sizes, e.g. 256 or 128,64");
  auto* o_std = app.add_option("--init-std", init_std);
  auto* o_seed = app.add_option("--seed", seed);
  auto* o_rho = app.add_option("--rho", rho, "log the robust risk at this radius every epoch");
  auto* o_gcn = app.add_flag("--gcn", gcn, "global contrast normalization of every sample");
  auto* o_out = app.add_option("--out", out, "output directory");
  auto* o_syn_n = app.add_option("--synthetic-n", syn_n);
  auto* o_syn_c = app.add_option("--synthetic-classes", syn_classes);
  auto* o_syn_d = app.add_option("--synthetic-dim", syn_dim);
  auto* o_syn_h = app.add_option("--synthetic-hardness", syn_hard);
  auto* o_syn_s = app.add_option("--synthetic-separation", syn_sep);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string("invalid arguments: ") + e.what());
  }

  ExperimentConfig c;
  if (o_config->count() > 0) {
    c = load_config_file(config_path, c);
  }
  if (o_dataset->count() > 0) c.dataset = parse_dataset(dataset);
  if (o_data_dir->count() > 0) c.data_dir = data_dir;
  if (o_train->count() > 0) c.train_size = train_size;
  if (o_sched->count() > 0) {
    const auto tok = parse_scheduler_token(scheduler);
    c.scheduler = tok.variant;
    if (tok.epsilon) {
      if (o_eps->count() > 0 && std::abs(*tok.epsilon - epsilon) > 1e-12) {
        throw UsageError("--scheduler " + scheduler + " implies epsilon " +
                         std::to_string(*tok.epsilon) + " but --epsilon is " +
                         std::to_string(epsilon));
      }
      c.epsilon = *tok.epsilon;
    } else if (tok.variant == Variant::baseline) {
      c.epsilon = 0.0;
    }
  }
  if (o_eps->count() > 0) c.epsilon = epsilon;
  if (o_epochs->count() > 0) c.epochs = epochs;
  if (o_batch->count() > 0) c.batch_size = batch_size;
  if (o_lr->count() > 0) c.learning_rate = lr;
  if (o_keep->count() > 0) c.dropout_keep = keep;
  if (o_hidden->count() > 0) {
    c.hidden_sizes.clear();
    std::stringstream ss(hidden);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || ptr != item.data() + item.size()) {
        throw UsageError("bad --hidden entry '" + item + "'");
      }
      c.hidden_sizes.push_back(v);
    }
  }
  if (o_std->count() > 0) c.init_std = init_std;
  if (o_seed->count() > 0) c.seed = seed;
  if (o_rho->count() > 0) c.rho = rho;
  if (o_gcn->count() > 0) c.gcn = gcn;
  if (o_out->count() > 0) c.output_dir = out;
  if (o_syn_n->count() > 0) c.synthetic.n = syn_n;
  if (o_syn_c->count() > 0) c.synthetic.classes = syn_classes;
  if (o_syn_d->count() > 0) c.synthetic.dim = syn_dim;
  if (o_syn_h->count() > 0) c.synthetic.hardness = syn_hard;
  if (o_syn_s->count() > 0) c.synthetic.separation = syn_sep;
  validate(c);
  return c;
}

}  // namespace rsamp::harness
