#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fnkit {

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void append_row(std::span<const double> values);
  Matrix select_rows(std::span<const std::size_t> indices) const;
  Matrix select_cols(std::span<const std::size_t> indices) const;
  std::vector<double> column(std::size_t c) const;

  const std::vector<double>& data() const { return data_; }
  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Labels: 0 = fake, 1 = true.
struct LabeledMatrix {
  Matrix x;
  std::vector<int> y;
  std::string schema_id;
  std::vector<std::string> feature_names;

  std::size_t rows() const { return x.rows(); }
  LabeledMatrix select_rows(std::span<const std::size_t> indices) const;
};

}  // namespace fnkit
