#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rsamp/mlp.hpp"
#include "rsamp/tensor.hpp"

namespace rsamp::data {

using nn::Label;

// Immutable labelled samples. Row i of `features` belongs to labels[i];
// source_ids[i] names that sample in the dataset it was carved from.
struct Dataset {
  std::string name;
  Matrix features;
  std::vector<Label> labels;
  std::vector<std::size_t> source_ids;
  std::size_t num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }

  // Throws DimensionError / ArgumentError if the fields disagree.
  void validate() const;

  // FNV-1a over the feature bit patterns followed by the labels.
  std::uint64_t checksum() const;
};

// Builds a dataset with source ids 0..n-1; num_classes = max label + 1 when 0.
Dataset make_dataset(std::string name, Matrix features, std::vector<Label> labels,
                     std::size_t num_classes = 0);

// Rows of `ds` at the given positions, keeping their source ids.
Dataset select(const Dataset& ds, const std::vector<std::size_t>& rows, std::string name);

// a followed by b; both must have the same feature width.
Dataset concat(const Dataset& a, const Dataset& b, std::string name);

// Loads an IDX image/label pair. Paths ending in ".gz" are inflated on the
// fly. Pixels are scaled by 1/255 into [0, 1].
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path);

// Raw IDX writers, mainly for fixtures. Gzip is chosen by the ".gz" suffix.
void write_idx_images(const std::filesystem::path& path, std::uint32_t count, std::uint32_t rows,
                      std::uint32_t cols, const std::vector<std::uint8_t>& pixels);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

struct SplitSpec {
  std::size_t train_size = 0;
  std::uint64_t seed = 0;
};

// Seeded shuffle of the rows: the first train_size form the training subset,
// the rest the holdout that joins validation.
std::pair<Dataset, Dataset> subset_split(const Dataset& train, const SplitSpec& spec);

// Per row: (x - mean) / max(std, 1e-8), population std.
Dataset gcn_normalize(const Dataset& ds);

struct BlobSpec {
  std::size_t n = 0;
  std::size_t classes = 0;
  std::size_t dim = 0;
  double hardness_fraction = 0.0;
  std::uint64_t seed = 0;
  // Distance between cluster centres in units of the within-cluster sigma.
  double separation = 10.0;
  double sigma = 1.0;
};

// Gaussian class clusters. Sample i has class i % classes. A seeded
// hardness_fraction of samples sits near the midpoint between its own centre
// and another class's centre.
Dataset synthetic_blobs(const BlobSpec& spec);

}  // namespace rsamp::data
