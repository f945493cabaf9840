#include "rsamp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "rsamp/errors.hpp"
#include "rsamp/rng.hpp"

namespace rsamp::data {

void Dataset::validate() const {
  if (features.rows() != labels.size() || source_ids.size() != labels.size()) {
    throw DimensionError("dataset '" + name + "': " + std::to_string(features.rows()) +
                         " feature rows, " + std::to_string(labels.size()) + " labels, " +
                         std::to_string(source_ids.size()) + " ids");
  }
  for (const Label y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw ArgumentError("dataset '" + name + "': label " + std::to_string(y) +
                          " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

std::uint64_t Dataset::checksum() const {
  const auto feature_bytes = std::as_bytes(features.data());
  const std::uint64_t h = fnv1a64(feature_bytes);
  return fnv1a64(std::as_bytes(std::span(labels)), h);
}

Dataset make_dataset(std::string name, Matrix features, std::vector<Label> labels,
                     std::size_t num_classes) {
  Dataset ds;
  ds.name = std::move(name);
  ds.features = std::move(features);
  ds.labels = std::move(labels);
  ds.source_ids.resize(ds.labels.size());
  for (std::size_t i = 0; i < ds.source_ids.size(); ++i) {
    ds.source_ids[i] = i;
  }
  if (num_classes == 0 && !ds.labels.empty()) {
    num_classes = static_cast<std::size_t>(*std::max_element(ds.labels.begin(), ds.labels.end())) + 1;
  }
  ds.num_classes = num_classes;
  ds.validate();
  return ds;
}

Dataset select(const Dataset& ds, const std::vector<std::size_t>& rows, std::string name) {
  Dataset out;
  out.name = std::move(name);
  out.num_classes = ds.num_classes;
  out.features = gather_rows(ds.features, rows);
  out.labels.reserve(rows.size());
  out.source_ids.reserve(rows.size());
  for (const std::size_t r : rows) {
    out.labels.push_back(ds.labels[r]);
    out.source_ids.push_back(ds.source_ids[r]);
  }
  return out;
}

Dataset concat(const Dataset& a, const Dataset& b, std::string name) {
  if (a.size() > 0 && b.size() > 0 && a.features.cols() != b.features.cols()) {
    throw DimensionError("concat: feature widths " + std::to_string(a.features.cols()) + " and " +
                         std::to_string(b.features.cols()));
  }
  const std::size_t cols = a.size() > 0 ? a.features.cols() : b.features.cols();
  std::vector<double> data(a.features.data().begin(), a.features.data().end());
  data.insert(data.end(), b.features.data().begin(), b.features.data().end());
  Dataset out;
  out.name = std::move(name);
  out.features = Matrix(a.size() + b.size(), cols, std::move(data));
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.source_ids = a.source_ids;
  out.source_ids.insert(out.source_ids.end(), b.source_ids.begin(), b.source_ids.end());
  out.num_classes = std::max(a.num_classes, b.num_classes);
  return out;
}

std::pair<Dataset, Dataset> subset_split(const Dataset& train, const SplitSpec& spec) {
  if (spec.train_size < 1 || spec.train_size > train.size()) {
    throw ArgumentError("subset_split: train_size " + std::to_string(spec.train_size) +
                        " outside [1, " + std::to_string(train.size()) + "]");
  }
  Rng rng(spec.seed);
  const auto perm = rng_shuffle(rng, train.size());
  const auto cut = perm.begin() + static_cast<std::ptrdiff_t>(spec.train_size);
  std::vector<std::size_t> head(perm.begin(), cut);
  std::vector<std::size_t> tail(cut, perm.end());
  return {select(train, head, train.name + "/train"), select(train, tail, train.name + "/holdout")};
}

Dataset gcn_normalize(const Dataset& ds) {
  Dataset out = ds;
  for (std::size_t r = 0; r < out.features.rows(); ++r) {
    auto row = out.features.row(r);
    if (row.empty()) {
      continue;
    }
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    if (*lo == *hi) {
      // the rounded mean of a constant row can differ from its entries
      std::fill(row.begin(), row.end(), 0.0);
      continue;
    }
    const MeanVar mv = reduce_mean_var(row);
    const double scale = std::max(std::sqrt(mv.variance), 1e-8);
    for (double& x : row) {
      x = (x - mv.mean) / scale;
    }
  }
  return out;
}

Dataset synthetic_blobs(const BlobSpec& spec) {
  if (spec.classes < 2) {
    throw ArgumentError("synthetic_blobs: need at least 2 classes");
  }
  if (spec.n < spec.classes) {
    throw ArgumentError("synthetic_blobs: n=" + std::to_string(spec.n) + " smaller than classes=" +
                        std::to_string(spec.classes));
  }
  if (spec.dim == 0) {
    throw ArgumentError("synthetic_blobs: dim must be positive");
  }
  if (!(spec.hardness_fraction >= 0.0 && spec.hardness_fraction < 1.0)) {
    throw ArgumentError("synthetic_blobs: hardness_fraction must lie in [0, 1)");
  }
  if (!(spec.sigma > 0.0) || !(spec.separation > 0.0)) {
    throw ArgumentError("synthetic_blobs: sigma and separation must be positive");
  }

  Rng root(spec.seed);
  Rng center_rng = root.fork("centers");
  Rng noise_rng = root.fork("noise");
  Rng hard_rng = root.fork("hard");

  // Axis-aligned centres give exact pairwise distance `separation * sigma`
  // when there are enough dimensions; otherwise use random Gaussian centres
  // of comparable spread.
  const double spread = spec.separation * spec.sigma;
  Matrix centers(spec.classes, spec.dim);
  if (spec.dim >= spec.classes) {
    for (std::size_t c = 0; c < spec.classes; ++c) {
      centers(c, c) = spread / std::sqrt(2.0);
    }
  } else {
    for (double& v : centers.data()) {
      v = spread * center_rng.normal() / std::sqrt(2.0);
    }
  }

  const auto hard_count = static_cast<std::size_t>(
      std::llround(spec.hardness_fraction * static_cast<double>(spec.n)));
  std::vector<bool> hard(spec.n, false);
  const auto perm = rng_shuffle(hard_rng, spec.n);
  for (std::size_t i = 0; i < hard_count; ++i) {
    hard[perm[i]] = true;
  }

  Matrix features(spec.n, spec.dim);
  std::vector<Label> labels(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t c = i % spec.classes;
    labels[i] = static_cast<Label>(c);
    auto row = features.row(i);
    const auto own = centers.row(c);
    if (hard[i]) {
      auto other = static_cast<std::size_t>(hard_rng.uniform_below(spec.classes - 1));
      if (other >= c) {
        ++other;
      }
      const auto far = centers.row(other);
      // Just on the own side of the midpoint, with reduced noise.
      for (std::size_t d = 0; d < spec.dim; ++d) {
        row[d] = own[d] + 0.45 * (far[d] - own[d]) + 0.25 * spec.sigma * noise_rng.normal();
      }
    } else {
      for (std::size_t d = 0; d < spec.dim; ++d) {
        row[d] = own[d] + spec.sigma * noise_rng.normal();
      }
    }
  }
  return make_dataset("synthetic", std::move(features), std::move(labels), spec.classes);
}

}  // namespace rsamp::data
