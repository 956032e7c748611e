#include "aaerec/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "aaerec/error.hpp"

namespace aaerec {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw ShapeError("DenseMatrix: " + std::to_string(values_.size()) + " values for shape " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const DenseMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

SparseBinaryMatrix SparseBinaryMatrix::from_rows(
    std::size_t n_cols, const std::vector<std::vector<std::uint32_t>>& rows) {
  SparseBinaryMatrix m(n_cols);
  m.row_ptr_.reserve(rows.size() + 1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::uint32_t> cols = rows[r];
    std::sort(cols.begin(), cols.end());
    if (std::adjacent_find(cols.begin(), cols.end()) != cols.end()) {
      throw ShapeError("SparseBinaryMatrix: duplicate column in row " + std::to_string(r));
    }
    if (!cols.empty() && cols.back() >= n_cols) {
      throw ShapeError("SparseBinaryMatrix: column " + std::to_string(cols.back()) +
                       " out of range for " + std::to_string(n_cols) + " columns");
    }
    m.col_idx_.insert(m.col_idx_.end(), cols.begin(), cols.end());
    m.row_ptr_.push_back(m.col_idx_.size());
  }
  return m;
}

SparseBinaryMatrix SparseBinaryMatrix::from_dense(const DenseMatrix& d) {
  std::vector<std::vector<std::uint32_t>> rows(d.rows());
  for (std::size_t r = 0; r < d.rows(); ++r)
    for (std::size_t c = 0; c < d.cols(); ++c)
      if (d(r, c) != 0.0) rows[r].push_back(static_cast<std::uint32_t>(c));
  return from_rows(d.cols(), rows);
}

bool SparseBinaryMatrix::contains(std::size_t r, std::uint32_t c) const {
  auto cols = row(r);
  return std::binary_search(cols.begin(), cols.end(), c);
}

DenseMatrix SparseBinaryMatrix::to_dense() const {
  DenseMatrix d(rows(), n_cols_);
  for (std::size_t r = 0; r < rows(); ++r)
    for (auto c : row(r)) d(r, c) = 1.0;
  return d;
}

std::vector<std::size_t> SparseBinaryMatrix::column_counts() const {
  std::vector<std::size_t> counts(n_cols_, 0);
  for (auto c : col_idx_) ++counts[c];
  return counts;
}

void SparseRealMatrix::push_row(std::span<const Entry> entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].col >= n_cols_ || (i > 0 && entries[i].col <= entries[i - 1].col)) {
      throw ShapeError("SparseRealMatrix: row entries must have increasing in-range columns");
    }
  }
  entries_.insert(entries_.end(), entries.begin(), entries.end());
  row_ptr_.push_back(entries_.size());
}

DenseMatrix SparseRealMatrix::to_dense() const {
  DenseMatrix d(rows(), n_cols_);
  for (std::size_t r = 0; r < rows(); ++r)
    for (const auto& e : row(r)) d(r, e.col) = e.value;
  return d;
}

}  // namespace aaerec
