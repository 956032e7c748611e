#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aaerec {

/// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  DenseMatrix transposed() const;
  bool all_finite() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

std::string shape_string(const DenseMatrix& m);

/// CSR pattern of a {0,1} matrix. Column indices are sorted and unique per row.
class SparseBinaryMatrix {
 public:
  SparseBinaryMatrix() = default;
  explicit SparseBinaryMatrix(std::size_t n_cols) : n_cols_(n_cols), row_ptr_{0} {}

  /// Builds from per-row column lists. Rows are sorted; duplicates and
  /// out-of-range columns throw.
  static SparseBinaryMatrix from_rows(std::size_t n_cols,
                                      const std::vector<std::vector<std::uint32_t>>& rows);
  static SparseBinaryMatrix from_dense(const DenseMatrix& m);

  std::size_t rows() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t cols() const { return n_cols_; }
  std::size_t nnz() const { return col_idx_.size(); }

  std::span<const std::uint32_t> row(std::size_t r) const {
    return {col_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  bool contains(std::size_t r, std::uint32_t c) const;

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> col_idx() const { return col_idx_; }

  DenseMatrix to_dense() const;
  std::vector<std::size_t> column_counts() const;

  friend bool operator==(const SparseBinaryMatrix&, const SparseBinaryMatrix&) = default;

 private:
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_idx_;
};

/// CSR matrix with real values (TF-IDF rows).
class SparseRealMatrix {
 public:
  struct Entry {
    std::uint32_t col;
    double value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  SparseRealMatrix() = default;
  explicit SparseRealMatrix(std::size_t n_cols) : n_cols_(n_cols) {}

  /// Appends a row; entries must have strictly increasing columns.
  void push_row(std::span<const Entry> entries);

  std::size_t rows() const { return row_ptr_.size() - 1; }
  std::size_t cols() const { return n_cols_; }
  std::size_t nnz() const { return entries_.size(); }

  std::span<const Entry> row(std::size_t r) const {
    return {entries_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  DenseMatrix to_dense() const;

  friend bool operator==(const SparseRealMatrix&, const SparseRealMatrix&) = default;

 private:
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Entry> entries_;
};

}  // namespace aaerec
