#include "grfmask/dense.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "grfmask/errors.hpp"
#include "grfmask/parallel.hpp"

namespace grfmask {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw ShapeError("DenseMatrix: entry count != rows * cols");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  DenseMatrix out(a.rows(), b.cols());
  parallel_for(a.rows(), [&](std::size_t i, std::size_t) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto src = b.row(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * src[j];
    }
  });
  return out;
}

DenseMatrix matmul_transposed(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_transposed: column counts differ");
  DenseMatrix out(a.rows(), b.rows());
  parallel_for(a.rows(), [&](std::size_t i, std::size_t) {
    auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto bj = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < ai.size(); ++k) s += ai[k] * bj[k];
      out(i, j) = s;
    }
  });
  return out;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("max_abs_diff: shape mismatch");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
  }
  return worst;
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_csv(std::ostream& out, const DenseMatrix& m) {
  out << m.rows() << ',' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

DenseMatrix read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("csv: missing header");
  long long rows = -1;
  long long cols = -1;
  char comma = 0;
  std::istringstream header(line);
  if (!(header >> rows >> comma >> cols) || comma != ',' || rows < 0 || cols < 0) {
    throw IoError("csv: header must be 'rows,cols'");
  }
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(rows * cols));
  for (long long i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw IoError("csv: expected " + std::to_string(rows) + " rows");
    std::istringstream row(line);
    std::string cell;
    long long count = 0;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        const double value = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos || !std::isfinite(value)) {
          throw std::invalid_argument(cell);
        }
        data.push_back(value);
      } catch (const std::exception&) {
        throw IoError("csv: bad number '" + cell + "' in row " + std::to_string(i));
      }
      ++count;
    }
    if (count != cols) throw IoError("csv: row " + std::to_string(i) + " has wrong column count");
  }
  return DenseMatrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(data));
}

void save_csv(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_csv(out, m);
  if (!out) throw IoError("failed writing " + path);
}

DenseMatrix load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_csv(in);
}

}  // namespace grfmask
