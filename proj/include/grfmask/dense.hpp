#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace grfmask {

// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const { return data_; }

  DenseMatrix transposed() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Row-parallel product; every output entry is summed in a fixed order, so the
// result does not depend on the worker count.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// a * b^T
DenseMatrix matmul_transposed(const DenseMatrix& a, const DenseMatrix& b);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// CSV: first line `rows,cols`, then one line per row, 17 significant digits.
void write_csv(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_csv(std::istream& in);
void save_csv(const std::string& path, const DenseMatrix& m);
DenseMatrix load_csv(const std::string& path);

std::string format_double(double value);

}  // namespace grfmask
