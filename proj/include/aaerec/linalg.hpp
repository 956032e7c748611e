#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aaerec/matrix.hpp"

namespace aaerec {

/// gram() refuses item spaces larger than this (10,000^2 doubles = 800 MB).
inline constexpr std::size_t kMaxGramItems = 10'000;

/// Dense matrices built from sparse input (SVD densification) are capped at
/// this many elements (400 MB of doubles).
inline constexpr std::size_t kMaxDenseElements = 50'000'000;

/// C = X^T X. For binary X, C(j,k) counts rows holding both j and k and the
/// diagonal holds per-column occurrence counts.
DenseMatrix gram(const SparseBinaryMatrix& x);

/// Exact product X * D for a binary sparse X.
DenseMatrix spmm(const SparseBinaryMatrix& x, const DenseMatrix& d);

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// a^T * b without materializing the transpose.
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// a * b^T without materializing the transpose.
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

double frobenius_norm(const DenseMatrix& m);

/// Thin orthonormal basis Q (rows x min(rows, cols)) of the column space of
/// `a`, via Householder reflections. Rank-deficient input still yields
/// orthonormal columns.
DenseMatrix orthonormal_basis(const DenseMatrix& a);

struct SvdFactors {
  DenseMatrix u;              // m x k
  std::vector<double> sigma;  // k, descending
  DenseMatrix vt;             // k x n

  std::size_t rank() const { return sigma.size(); }
  DenseMatrix reconstruct() const;
};

/// Full thin SVD of a small dense matrix by one-sided Jacobi rotations.
/// Returns min(rows, cols) components sorted by descending singular value.
SvdFactors jacobi_svd(const DenseMatrix& a);

struct TruncatedSvdOptions {
  std::size_t oversampling = 10;
  std::size_t power_iterations = 4;
};

/// Rank-k SVD by randomized subspace iteration: Gaussian range sketch,
/// power iterations with re-orthonormalization, then an exact SVD of the
/// projected (k + oversampling) x n problem. Deterministic for a given seed.
/// Each singular pair is signed so the largest-magnitude entry of its right
/// singular vector is positive.
SvdFactors truncated_svd(const DenseMatrix& m, std::size_t k, std::uint64_t seed,
                         const TruncatedSvdOptions& options = {});

/// Number of singular values above `rel_tol * sigma_max`.
std::size_t numerical_rank(const std::vector<double>& sigma, double rel_tol = 1e-9);

}  // namespace aaerec
