#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace rsamp {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  // Nested-list construction for tests and small fixtures; rows must be equal length.
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  std::string shape_string() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a * b.
Matrix matmul(const Matrix& a, const Matrix& b);
// transpose(a) * b, without materializing the transpose.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
// a * transpose(b), without materializing the transpose.
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

// Adds `bias` to every row in place. bias.size() must equal m.cols().
void add_row_vector(Matrix& m, std::span<const double> bias);
// Column sums, accumulated top to bottom.
std::vector<double> column_sums(const Matrix& m);

// Copies the listed rows of `src` into a new matrix, in order.
Matrix gather_rows(const Matrix& src, std::span<const std::size_t> rows);

bool all_finite(std::span<const double> v) noexcept;

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // population variance (divide by n)
};

// Two-pass mean and population variance. Throws ArgumentError on empty input.
MeanVar reduce_mean_var(std::span<const double> v);

}  // namespace rsamp
