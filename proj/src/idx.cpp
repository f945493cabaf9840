#include <zlib.h>

#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "rsamp/dataset.hpp"
#include "rsamp/errors.hpp"

namespace rsamp::data {

namespace {

constexpr std::uint32_t kImageMagic = 2051;  // 00 00 08 03
constexpr std::uint32_t kLabelMagic = 2049;  // 00 00 08 01

bool is_gzip(const std::filesystem::path& path) {
  return path.extension() == ".gz";
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  if (is_gzip(path)) {
    const std::unique_ptr<gzFile_s, decltype(&gzclose)> gz(gzopen(path.c_str(), "rb"), &gzclose);
    if (!gz) {
      throw IoError("cannot open " + path.string());
    }
    std::uint8_t buf[1 << 16];
    while (true) {
      const int got = gzread(gz.get(), buf, sizeof(buf));
      if (got < 0) {
        throw IoError("corrupt gzip stream in " + path.string());
      }
      if (got == 0) {
        break;
      }
      bytes.insert(bytes.end(), buf, buf + got);
    }
    return bytes;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return bytes;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (is_gzip(path)) {
    const std::unique_ptr<gzFile_s, decltype(&gzclose)> gz(gzopen(path.c_str(), "wb"), &gzclose);
    if (!gz || gzwrite(gz.get(), bytes.data(), static_cast<unsigned>(bytes.size())) !=
                   static_cast<int>(bytes.size())) {
      throw IoError("cannot write " + path.string());
    }
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    throw IoError("truncated IDX header in " + path.string());
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& bytes, std::uint32_t v) {
  bytes.push_back(static_cast<std::uint8_t>(v >> 24));
  bytes.push_back(static_cast<std::uint8_t>(v >> 16));
  bytes.push_back(static_cast<std::uint8_t>(v >> 8));
  bytes.push_back(static_cast<std::uint8_t>(v));
}

void check_magic(std::uint32_t observed, std::uint32_t expected, const std::filesystem::path& path) {
  if (observed != expected) {
    throw FormatError("bad IDX magic in " + path.string() + ": expected " +
                      std::to_string(expected) + ", observed " + std::to_string(observed));
  }
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path) {
  const auto img = read_bytes(images_path);
  check_magic(read_be32(img, 0, images_path), kImageMagic, images_path);
  const std::uint32_t count = read_be32(img, 4, images_path);
  const std::uint32_t rows = read_be32(img, 8, images_path);
  const std::uint32_t cols = read_be32(img, 12, images_path);
  const std::size_t pixels = std::size_t{rows} * cols;
  const std::size_t need = 16 + std::size_t{count} * pixels;
  if (img.size() < need) {
    throw IoError("truncated IDX image file " + images_path.string() + ": expected " +
                  std::to_string(need) + " bytes, found " + std::to_string(img.size()));
  }

  const auto lab = read_bytes(labels_path);
  check_magic(read_be32(lab, 0, labels_path), kLabelMagic, labels_path);
  const std::uint32_t label_count = read_be32(lab, 4, labels_path);
  if (label_count != count) {
    throw ConsistencyError("IDX count mismatch: " + std::to_string(count) + " images in " +
                           images_path.string() + " but " + std::to_string(label_count) +
                           " labels in " + labels_path.string());
  }
  if (lab.size() < 8 + std::size_t{count}) {
    throw IoError("truncated IDX label file " + labels_path.string());
  }

  Matrix features(count, pixels);
  auto out = features.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(img[16 + i]) / 255.0;
  }
  std::vector<Label> labels(count);
  for (std::size_t i = 0; i < count; ++i) {
    labels[i] = static_cast<Label>(lab[8 + i]);
  }
  return make_dataset(images_path.filename().string(), std::move(features), std::move(labels));
}

void write_idx_images(const std::filesystem::path& path, std::uint32_t count, std::uint32_t rows,
                      std::uint32_t cols, const std::vector<std::uint8_t>& pixels) {
  if (pixels.size() != std::size_t{count} * rows * cols) {
    throw ArgumentError("write_idx_images: pixel buffer does not match count*rows*cols");
  }
  std::vector<std::uint8_t> bytes;
  bytes.reserve(16 + pixels.size());
  put_be32(bytes, kImageMagic);
  put_be32(bytes, count);
  put_be32(bytes, rows);
  put_be32(bytes, cols);
  bytes.insert(bytes.end(), pixels.begin(), pixels.end());
  write_bytes(path, bytes);
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(8 + labels.size());
  put_be32(bytes, kLabelMagic);
  put_be32(bytes, static_cast<std::uint32_t>(labels.size()));
  bytes.insert(bytes.end(), labels.begin(), labels.end());
  write_bytes(path, bytes);
}

}  // namespace rsamp::data
