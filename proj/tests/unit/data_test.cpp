#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "rsamp/dataset.hpp"
#include "rsamp/errors.hpp"
#include "rsamp/mlp.hpp"

using namespace rsamp;
using namespace rsamp::data;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("rsamp_data_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

// Two 28x28 images: the first all 0 except pixel 0 = 255 and pixel 783 = 51,
// the second a ramp of (i % 256).
std::vector<std::uint8_t> fixture_images() {
  std::vector<std::uint8_t> b{0x00, 0x00, 0x08, 0x03};
  be32(b, 2);
  be32(b, 28);
  be32(b, 28);
  std::vector<std::uint8_t> first(784, 0);
  first[0] = 255;
  first[783] = 51;
  b.insert(b.end(), first.begin(), first.end());
  for (int i = 0; i < 784; ++i) b.push_back(static_cast<std::uint8_t>(i % 256));
  return b;
}

std::vector<std::uint8_t> fixture_labels() { return {0x00, 0x00, 0x08, 0x01, 0, 0, 0, 2, 7, 3}; }

Dataset tiny(std::size_t n) {
  Matrix x(n, 2);
  std::vector<Label> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = static_cast<double>(i);
    x(i, 1) = -static_cast<double>(i);
    y[i] = static_cast<Label>(i % 3);
  }
  return make_dataset("tiny", x, y);
}

}  // namespace

TEST(LoadIdx, HandBuiltFixture) {
  TempDir dir;
  write_bytes(dir.path() / "img", fixture_images());
  write_bytes(dir.path() / "lbl", fixture_labels());
  const auto ds = load_idx(dir.path() / "img", dir.path() / "lbl");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.features.cols(), 784u);
  EXPECT_EQ(ds.labels, (std::vector<Label>{7, 3}));
  EXPECT_EQ(ds.features(0, 0), 1.0);
  EXPECT_EQ(ds.features(0, 1), 0.0);
  EXPECT_EQ(ds.features(0, 783), 0.2);
  for (int i = 0; i < 784; ++i) EXPECT_EQ(ds.features(1, i), (i % 256) / 255.0);
  EXPECT_EQ(ds.source_ids, (std::vector<std::size_t>{0, 1}));
}

TEST(LoadIdx, WritersProduceTheStandardLayout) {
  TempDir dir;
  const auto raw = fixture_images();
  std::vector<std::uint8_t> pixels(raw.begin() + 16, raw.end());
  write_idx_images(dir.path() / "img", 2, 28, 28, pixels);
  write_idx_labels(dir.path() / "lbl", {7, 3});
  EXPECT_EQ(read_bytes(dir.path() / "img"), raw);
  EXPECT_EQ(read_bytes(dir.path() / "lbl"), fixture_labels());
}

TEST(LoadIdx, GzipRoundTrip) {
  TempDir dir;
  const auto raw = fixture_images();
  std::vector<std::uint8_t> pixels(raw.begin() + 16, raw.end());
  write_idx_images(dir.path() / "img.gz", 2, 28, 28, pixels);
  write_idx_labels(dir.path() / "lbl.gz", {7, 3});
  const auto gz = read_bytes(dir.path() / "img.gz");
  ASSERT_GE(gz.size(), 2u);
  EXPECT_EQ(gz[0], 0x1f);
  EXPECT_EQ(gz[1], 0x8b);
  write_bytes(dir.path() / "img", raw);
  write_bytes(dir.path() / "lbl", fixture_labels());
  const auto a = load_idx(dir.path() / "img.gz", dir.path() / "lbl.gz");
  const auto b = load_idx(dir.path() / "img", dir.path() / "lbl");
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
}

TEST(LoadIdx, WrongMagicReportsObservedValue) {
  TempDir dir;
  auto img = fixture_images();
  img[3] = 0x01;
  write_bytes(dir.path() / "img", img);
  write_bytes(dir.path() / "lbl", fixture_labels());
  try {
    load_idx(dir.path() / "img", dir.path() / "lbl");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("2049"), std::string::npos);
  }
  write_bytes(dir.path() / "img", fixture_images());
  write_bytes(dir.path() / "lbl", {0x00, 0x00, 0x08, 0x03, 0, 0, 0, 2, 7, 3});
  EXPECT_THROW(load_idx(dir.path() / "img", dir.path() / "lbl"), FormatError);
}

TEST(LoadIdx, CountMismatchIsConsistencyError) {
  TempDir dir;
  write_bytes(dir.path() / "img", fixture_images());
  write_bytes(dir.path() / "lbl", {0x00, 0x00, 0x08, 0x01, 0, 0, 0, 3, 7, 3, 1});
  EXPECT_THROW(load_idx(dir.path() / "img", dir.path() / "lbl"), ConsistencyError);
}

TEST(LoadIdx, TruncationAndMissingFilesAreIoErrors) {
  TempDir dir;
  auto img = fixture_images();
  img.resize(img.size() - 10);
  write_bytes(dir.path() / "img", img);
  write_bytes(dir.path() / "lbl", fixture_labels());
  EXPECT_THROW(load_idx(dir.path() / "img", dir.path() / "lbl"), IoError);
  write_bytes(dir.path() / "short", {0x00, 0x00, 0x08});
  EXPECT_THROW(load_idx(dir.path() / "short", dir.path() / "lbl"), IoError);
  write_bytes(dir.path() / "img", fixture_images());
  write_bytes(dir.path() / "lbl", {0x00, 0x00, 0x08, 0x01, 0, 0, 0, 2, 7});
  EXPECT_THROW(load_idx(dir.path() / "img", dir.path() / "lbl"), IoError);
  EXPECT_THROW(load_idx(dir.path() / "absent", dir.path() / "lbl"), IoError);
  write_bytes(dir.path() / "bad.gz", {0x1f, 0x8b, 0x08, 0x00, 0x01, 0x02});
  EXPECT_THROW(load_idx(dir.path() / "bad.gz", dir.path() / "lbl"), IoError);
}

TEST(LoadIdx, BundledMnistSubset) {
  const fs::path dir = RSAMP_MNIST_DIR;
  if (!fs::exists(dir / "train-images-idx3-ubyte.gz")) GTEST_SKIP() << "no MNIST files in " << dir;
  const auto ds = load_idx(dir / "train-images-idx3-ubyte.gz", dir / "train-labels-idx1-ubyte.gz");
  EXPECT_EQ(ds.size(), 5000u);
  EXPECT_EQ(ds.features.cols(), 784u);
  EXPECT_EQ(ds.num_classes, 10u);
  std::vector<int> per_class(10, 0);
  for (auto y : ds.labels) ++per_class[static_cast<std::size_t>(y)];
  for (int c : per_class) EXPECT_EQ(c, 500);
  for (double v : ds.features.data()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(SubsetSplit, FullSizeLeavesEmptyHoldout) {
  const auto ds = tiny(10);
  const auto [train, hold] = subset_split(ds, {10, 1});
  EXPECT_EQ(train.size(), 10u);
  EXPECT_EQ(hold.size(), 0u);
}

TEST(SubsetSplit, PartitionsIdsAndKeepsAlignment) {
  const auto ds = tiny(10);
  const auto [train, hold] = subset_split(ds, {7, 42});
  ASSERT_EQ(train.size(), 7u);
  ASSERT_EQ(hold.size(), 3u);
  std::set<std::size_t> seen;
  for (const auto* part : {&train, &hold}) {
    for (std::size_t i = 0; i < part->size(); ++i) {
      const auto id = part->source_ids[i];
      EXPECT_TRUE(seen.insert(id).second);
      EXPECT_EQ(part->features(i, 0), static_cast<double>(id));
      EXPECT_EQ(part->labels[i], static_cast<Label>(id % 3));
    }
  }
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(*seen.rbegin(), 9u);
}

TEST(SubsetSplit, SameSeedSamePartition) {
  const auto ds = tiny(50);
  const auto a = subset_split(ds, {20, 5});
  const auto b = subset_split(ds, {20, 5});
  EXPECT_EQ(a.first.source_ids, b.first.source_ids);
  EXPECT_EQ(a.second.source_ids, b.second.source_ids);
  const auto c = subset_split(ds, {20, 6});
  EXPECT_NE(a.first.source_ids, c.first.source_ids);
}

TEST(SubsetSplit, RangeErrors) {
  const auto ds = tiny(5);
  EXPECT_THROW(subset_split(ds, {0, 1}), ArgumentError);
  EXPECT_THROW(subset_split(ds, {6, 1}), ArgumentError);
}

TEST(Gcn, HandCases) {
  const auto ds = make_dataset("g", Matrix::from_rows({{1, 3}, {4, 4}}), {0, 1});
  const auto out = gcn_normalize(ds);
  EXPECT_EQ(out.features, Matrix::from_rows({{-1, 1}, {0, 0}}));
  EXPECT_EQ(out.labels, ds.labels);
}

TEST(Gcn, RowStatisticsAndIdempotence) {
  Rng rng(3);
  Matrix x(40, 30);
  for (std::size_t r = 0; r < 40; ++r) {
    const double offset = 10 * rng.uniform01();
    const double scale = 0.01 + 5 * rng.uniform01();
    for (std::size_t c = 0; c < 30; ++c) x(r, c) = offset + scale * rng.normal();
  }
  for (std::size_t c = 0; c < 30; ++c) x(39, c) = 0.7;  // constant row
  const auto once = gcn_normalize(make_dataset("g", x, std::vector<Label>(40, 0)));
  for (std::size_t r = 0; r < 40; ++r) {
    double mean = 0;
    for (double v : once.features.row(r)) mean += v;
    mean /= 30;
    double var = 0;
    for (double v : once.features.row(r)) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / 30);
    EXPECT_LT(std::abs(mean), 1e-10);
    EXPECT_NEAR(sd, r == 39 ? 0.0 : 1.0, 1e-6);
  }
  const auto twice = gcn_normalize(once);
  for (std::size_t r = 0; r < 39; ++r) {
    for (std::size_t c = 0; c < 30; ++c) EXPECT_NEAR(twice.features(r, c), once.features(r, c), 1e-8);
  }
}

TEST(Blobs, SameSeedBitIdentical) {
  const BlobSpec spec{200, 5, 8, 0.2, 9};
  const auto a = synthetic_blobs(spec);
  const auto b = synthetic_blobs(spec);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.checksum(), b.checksum());
  BlobSpec other = spec;
  other.seed = 10;
  EXPECT_NE(synthetic_blobs(other).checksum(), a.checksum());
}

TEST(Blobs, StratifiedLabelCounts) {
  const auto a = synthetic_blobs({100, 10, 4, 0.0, 1});
  std::vector<int> counts(10, 0);
  for (auto y : a.labels) ++counts[static_cast<std::size_t>(y)];
  for (int c : counts) EXPECT_EQ(c, 10);
  const auto b = synthetic_blobs({103, 10, 4, 0.3, 1});
  std::vector<int> counts_b(10, 0);
  for (auto y : b.labels) ++counts_b[static_cast<std::size_t>(y)];
  for (int k = 0; k < 10; ++k) EXPECT_EQ(counts_b[k], k < 3 ? 11 : 10);
}

TEST(Blobs, DegenerateParametersRejected) {
  EXPECT_THROW(synthetic_blobs({5, 10, 4, 0.0, 1}), ArgumentError);
  EXPECT_THROW(synthetic_blobs({10, 1, 4, 0.0, 1}), ArgumentError);
  EXPECT_THROW(synthetic_blobs({10, 2, 0, 0.0, 1}), ArgumentError);
  EXPECT_THROW(synthetic_blobs({10, 2, 4, 1.0, 1}), ArgumentError);
  EXPECT_THROW(synthetic_blobs({10, 2, 4, -0.1, 1}), ArgumentError);
}

TEST(Blobs, WellSeparatedClustersAreLinearlySeparable) {
  const auto ds = synthetic_blobs({1000, 10, 16, 0.0, 4});
  // nearest-centroid oracle
  Matrix centroids(10, 16);
  std::vector<int> counts(10, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto y = static_cast<std::size_t>(ds.labels[i]);
    ++counts[y];
    for (std::size_t c = 0; c < 16; ++c) centroids(y, c) += ds.features(i, c);
  }
  for (std::size_t k = 0; k < 10; ++k) {
    for (std::size_t c = 0; c < 16; ++c) centroids(k, c) /= counts[k];
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t k = 0; k < 10; ++k) {
      double d = 0;
      for (std::size_t c = 0; c < 16; ++c) d += std::pow(ds.features(i, c) - centroids(k, c), 2);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    hits += best == static_cast<std::size_t>(ds.labels[i]);
  }
  EXPECT_GE(hits / 1000.0, 0.99);

  // a softmax-linear model trained with plain SGD reaches the same bar
  Rng rng(5);
  auto model = nn::ModelParams::init(std::vector<std::size_t>{16, 10}, 0.01, rng);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < 20; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += 50) {
      std::vector<std::size_t> rows(order.begin() + start, order.begin() + start + 50);
      std::vector<Label> y;
      for (auto r : rows) y.push_back(ds.labels[r]);
      nn::train_step(model, gather_rows(ds.features, rows), y, 1.0, 0.05, rng);
    }
  }
  EXPECT_GE(nn::evaluate_accuracy(model, ds.features, ds.labels), 0.99);
}

TEST(Blobs, HardSamplesSitBetweenClusters) {
  const auto easy = synthetic_blobs({500, 5, 10, 0.0, 7});
  const auto hard = synthetic_blobs({500, 5, 10, 0.4, 7});
  auto centroid_accuracy = [](const Dataset& ds) {
    // centroids of the easy data give the reference geometry
    Matrix centroids(5, 10);
    std::vector<int> counts(5, 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto y = static_cast<std::size_t>(ds.labels[i]);
      ++counts[y];
      for (std::size_t c = 0; c < 10; ++c) centroids(y, c) += ds.features(i, c);
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      std::size_t best = 0;
      double best_d = INFINITY;
      for (std::size_t k = 0; k < 5; ++k) {
        double d = 0;
        for (std::size_t c = 0; c < 10; ++c) d += std::pow(ds.features(i, c) - centroids(k, c) / counts[k], 2);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      hits += best == static_cast<std::size_t>(ds.labels[i]);
    }
    return hits / static_cast<double>(ds.size());
  };
  EXPECT_GT(centroid_accuracy(easy), centroid_accuracy(hard));
}

TEST(DatasetOps, SelectConcatValidate) {
  const auto ds = tiny(6);
  const auto a = select(ds, {4, 1}, "a");
  EXPECT_EQ(a.source_ids, (std::vector<std::size_t>{4, 1}));
  const auto both = concat(a, select(ds, {0}, "b"), "ab");
  EXPECT_EQ(both.size(), 3u);
  EXPECT_EQ(both.source_ids, (std::vector<std::size_t>{4, 1, 0}));
  EXPECT_THROW(make_dataset("bad", Matrix(3, 2), {0, 1}), DimensionError);
  EXPECT_THROW(make_dataset("bad", Matrix(2, 2), {0, 5}, 3), ArgumentError);
  EXPECT_THROW(concat(ds, make_dataset("w", Matrix(1, 3), {0}), "x"), DimensionError);
}
