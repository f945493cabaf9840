#include "rsamp/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include "rsamp/errors.hpp"
#include "rsamp/robust_weights.hpp"

namespace rsamp::harness {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMnistClasses = 10;

// Finds `stem` or `stem.gz` inside dir.
std::optional<fs::path> find_idx(const fs::path& dir, const std::string& stem) {
  for (const auto& name : {stem, stem + ".gz"}) {
    const fs::path p = dir / name;
    if (fs::exists(p)) {
      return p;
    }
  }
  return std::nullopt;
}

data::Dataset load_mnist_part(const fs::path& dir, const std::string& prefix, bool required) {
  const auto images = find_idx(dir, prefix + "-images-idx3-ubyte");
  const auto labels = find_idx(dir, prefix + "-labels-idx1-ubyte");
  if (!images || !labels) {
    if (required) {
      throw IoError("MNIST files " + prefix + "-{images-idx3,labels-idx1}-ubyte[.gz] not found in " +
                    dir.string());
    }
    return {};
  }
  data::Dataset ds = data::load_idx(*images, *labels);
  ds.num_classes = std::max(ds.num_classes, kMnistClasses);
  return ds;
}

}  // namespace

std::string code_version() {
  return std::string("rsamp ") + RSAMP_VERSION;
}

PreparedData prepare_data(const ExperimentConfig& config) {
  validate(config);
  const Rng root(config.seed);
  data::Dataset full;
  data::Dataset test;
  if (config.dataset == DatasetKind::mnist) {
    full = load_mnist_part(config.data_dir, "train", true);
    test = load_mnist_part(config.data_dir, "t10k", false);
    full.name = "mnist";
  } else {
    data::BlobSpec spec;
    spec.n = config.synthetic.n;
    spec.classes = config.synthetic.classes;
    spec.dim = config.synthetic.dim;
    spec.hardness_fraction = config.synthetic.hardness;
    spec.separation = config.synthetic.separation;
    spec.seed = root.fork("synthetic").seed();
    full = data::synthetic_blobs(spec);
  }
  if (config.train_size > full.size()) {
    throw UsageError("train_size " + std::to_string(config.train_size) + " exceeds the " +
                     std::to_string(full.size()) + " available samples");
  }
  auto split_rng = root.fork("split");
  auto [train, holdout] = data::subset_split(full, {config.train_size, split_rng.next_u64()});
  data::Dataset validation =
      test.size() > 0 ? data::concat(holdout, test, full.name + "/validation") : std::move(holdout);
  validation.name = full.name + "/validation";
  if (validation.size() == 0) {
    throw UsageError("no validation samples: train_size uses the whole dataset and no test files exist");
  }
  if (config.gcn) {
    train = data::gcn_normalize(train);
    validation = data::gcn_normalize(validation);
  }
  return {std::move(train), std::move(validation)};
}

RunResult run_experiment(const ExperimentConfig& config, const RunHooks& hooks) {
  return run_experiment(config, prepare_data(config), hooks);
}

RunResult run_experiment(const ExperimentConfig& config, const PreparedData& data,
                         const RunHooks& hooks) {
  validate(config);
  const data::Dataset& train = data.train;
  const data::Dataset& validation = data.validation;
  if (train.size() != config.train_size) {
    throw ArgumentError("prepared training set has " + std::to_string(train.size()) +
                        " samples, config says " + std::to_string(config.train_size));
  }
  const std::size_t n = train.size();
  const std::size_t classes = std::max(train.num_classes, validation.num_classes);

  const Rng root(config.seed);
  Rng init_rng = root.fork("init");
  Rng dropout_rng = root.fork("dropout");

  std::vector<std::size_t> sizes{train.features.cols()};
  sizes.insert(sizes.end(), config.hidden_sizes.begin(), config.hidden_sizes.end());
  sizes.push_back(classes);

  RunResult result;
  result.model = nn::ModelParams::init(sizes, config.init_std, init_rng);
  result.ledger = sampling::SampleLedger(n);
  sampling::Scheduler scheduler(config.scheduler, config.epsilon, root.fork("shuffle"),
                                root.fork("pvr"));

  using Clock = std::chrono::steady_clock;
  std::vector<std::size_t> rows;
  std::vector<nn::Label> labels;
  std::uint64_t reinjected = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = Clock::now();
    scheduler.begin_epoch(n);
    reinjected += sampling::is_epoch_family(config.scheduler) ? scheduler.substitution_plan().size() : 0;
    double loss_sum = 0.0;
    std::size_t slots = 0;
    std::size_t batch = 0;
    while (auto plan = scheduler.next_batch(config.batch_size)) {
      ++batch;
      rows.assign(plan->ids.begin(), plan->ids.end());
      labels.clear();
      for (const auto id : plan->ids) {
        labels.push_back(train.labels[id]);
      }
      const Matrix x = gather_rows(train.features, rows);
      const nn::ForwardPass pass =
          nn::forward(result.model, x, config.dropout_keep, dropout_rng, nn::Mode::train);
      const std::vector<double> losses = nn::loss_per_sample(pass.logits, labels);
      if (!all_finite(losses)) {
        throw DivergenceError(epoch, batch,
                              "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                  std::to_string(batch));
      }
      const nn::Gradients grads = nn::backward(result.model, pass, labels);
      try {
        nn::sgd_step(result.model, grads, config.learning_rate);
      } catch (const NumericalError& e) {
        throw DivergenceError(epoch, batch,
                              std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                                  ", batch " + std::to_string(batch));
      }
      if (!result.model.all_finite()) {
        throw DivergenceError(epoch, batch,
                              "non-finite parameters at epoch " + std::to_string(epoch) +
                                  ", batch " + std::to_string(batch));
      }
      scheduler.record_losses(*plan, losses, result.ledger);
      reinjected += plan->carried_count();
      for (const double l : losses) {
        loss_sum += l;
      }
      slots += losses.size();
      if (hooks.on_batch) {
        hooks.on_batch(BatchEvent{epoch, batch, *plan, losses});
      }
    }

    MetricsRow row;
    row.epoch = epoch;
    row.mean_train_loss = loss_sum / static_cast<double>(slots);
    row.validation_accuracy =
        nn::evaluate_accuracy(result.model, validation.features, validation.labels);
    if (config.rho) {
      std::vector<double> scored;
      for (const double l : scheduler.epoch_losses()) {
        if (!std::isnan(l)) {
          scored.push_back(l);
        }
      }
      row.robust_risk = dro::robust_risk(scored, *config.rho).value;
    }
    scheduler.end_epoch();
    row.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
    result.metrics.push_back(row);
    if (hooks.on_epoch) {
      hooks.on_epoch(row);
    }
  }

  RunManifest& m = result.manifest;
  m.config = config;
  m.code_version = code_version();
  m.label = scheduler_label(config.scheduler, config.epsilon);
  const std::uint64_t train_sum = train.checksum();
  m.dataset_checksum = fnv1a64(std::as_bytes(std::span(&train_sum, 1)), validation.checksum());
  m.train_samples = train.size();
  m.validation_samples = validation.size();
  m.final_accuracy = result.metrics.back().validation_accuracy;
  m.total_usage = result.ledger.total_consumed();
  m.reinjected_slots = reinjected;
  return result;
}

}  // namespace rsamp::harness
