#include "aaerec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "aaerec/error.hpp"

namespace aaerec {

DenseMatrix gram(const SparseBinaryMatrix& x) {
  if (x.rows() == 0) throw Error("gram: input matrix has no rows");
  const std::size_t n = x.cols();
  if (n > kMaxGramItems) {
    throw CapacityError("gram: " + std::to_string(n) + " items exceeds the dense limit of " +
                        std::to_string(kMaxGramItems));
  }
  DenseMatrix c(n, n);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto cols = x.row(r);
    for (auto j : cols)
      for (auto k : cols) c(j, k) += 1.0;
  }
  return c;
}

DenseMatrix spmm(const SparseBinaryMatrix& x, const DenseMatrix& d) {
  if (x.cols() != d.rows()) {
    throw ShapeError("spmm: sparse " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                     " times dense " + shape_string(d));
  }
  DenseMatrix out(x.rows(), d.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto dst = out.row(r);
    for (auto k : x.row(r)) {
      auto src = d.row(k);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
  }
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_string(a) + " times " + shape_string(b));
  }
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto src = b.row(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: transpose of " + shape_string(a) + " times " + shape_string(b));
  }
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto arow = a.row(k);
    auto brow = b.row(k);
    for (std::size_t i = 0; i < arow.size(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      auto dst = out.row(i);
      for (std::size_t j = 0; j < brow.size(); ++j) dst[j] += aki * brow[j];
    }
  }
  return out;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: " + shape_string(a) + " times transpose of " + shape_string(b));
  }
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto brow = b.row(j);
      out(i, j) = std::inner_product(arow.begin(), arow.end(), brow.begin(), 0.0);
    }
  }
  return out;
}

double frobenius_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v * v;
  return std::sqrt(s);
}

DenseMatrix orthonormal_basis(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const std::size_t p = std::min(m, n);
  DenseMatrix r = a;
  std::vector<std::vector<double>> reflectors(p);

  for (std::size_t k = 0; k < p; ++k) {
    std::vector<double> v(m - k);
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) {
      v[i - k] = r(i, k);
      norm += v[i - k] * v[i - k];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double alpha = v[0] >= 0.0 ? -norm : norm;
    v[0] -= alpha;
    double vnorm = 0.0;
    for (double x : v) vnorm += x * x;
    vnorm = std::sqrt(vnorm);
    if (vnorm == 0.0) continue;
    for (double& x : v) x /= vnorm;
    for (std::size_t j = k; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += v[i - k] * r(i, j);
      for (std::size_t i = k; i < m; ++i) r(i, j) -= 2.0 * dot * v[i - k];
    }
    reflectors[k] = std::move(v);
  }

  DenseMatrix q(m, p);
  for (std::size_t i = 0; i < p; ++i) q(i, i) = 1.0;
  for (std::size_t k = p; k-- > 0;) {
    const auto& v = reflectors[k];
    if (v.empty()) continue;
    for (std::size_t j = 0; j < p; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += v[i - k] * q(i, j);
      for (std::size_t i = k; i < m; ++i) q(i, j) -= 2.0 * dot * v[i - k];
    }
  }
  return q;
}

DenseMatrix SvdFactors::reconstruct() const {
  DenseMatrix scaled = u;
  for (std::size_t i = 0; i < scaled.rows(); ++i)
    for (std::size_t j = 0; j < sigma.size(); ++j) scaled(i, j) *= sigma[j];
  return matmul(scaled, vt);
}

namespace {

// One-sided Jacobi on the columns of g (rows >= cols). On return the columns
// of g are mutually orthogonal and g_in = g * v^T.
void jacobi_orthogonalize(DenseMatrix& g, DenseMatrix& v) {
  const std::size_t m = g.rows();
  const std::size_t n = g.cols();
  v = DenseMatrix::identity(n);
  constexpr double kEps = 1e-15;
  constexpr int kMaxSweeps = 100;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double gp = g(i, p), gq = g(i, q);
          alpha += gp * gp;
          beta += gq * gq;
          gamma += gp * gq;
        }
        if (gamma == 0.0 || std::abs(gamma) <= kEps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double gp = g(i, p), gq = g(i, q);
          g(i, p) = c * gp - s * gq;
          g(i, q) = s * gp + c * gq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
}

// Replaces columns of `basis` flagged in `missing` with unit vectors
// orthogonal to every other column.
void complete_orthonormal(DenseMatrix& basis, const std::vector<bool>& missing) {
  const std::size_t m = basis.rows();
  std::size_t candidate = 0;
  for (std::size_t col = 0; col < basis.cols(); ++col) {
    if (!missing[col]) continue;
    for (; candidate < m; ++candidate) {
      std::vector<double> x(m, 0.0);
      x[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t other = 0; other < basis.cols(); ++other) {
          if (other == col || (missing[other] && other > col)) continue;
          double dot = 0.0;
          for (std::size_t i = 0; i < m; ++i) dot += x[i] * basis(i, other);
          for (std::size_t i = 0; i < m; ++i) x[i] -= dot * basis(i, other);
        }
      }
      double norm = 0.0;
      for (double xi : x) norm += xi * xi;
      norm = std::sqrt(norm);
      if (norm > 0.5) {
        for (std::size_t i = 0; i < m; ++i) basis(i, col) = x[i] / norm;
        ++candidate;
        break;
      }
    }
  }
}

}  // namespace

SvdFactors jacobi_svd(const DenseMatrix& a) {
  const bool wide = a.rows() < a.cols();
  DenseMatrix g = wide ? a.transposed() : a;
  DenseMatrix v;
  jacobi_orthogonalize(g, v);

  const std::size_t n = g.cols();
  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i) s += g(i, j) * g(i, j);
    sigma[j] = std::sqrt(s);
  }
  const double smax = n ? *std::max_element(sigma.begin(), sigma.end()) : 0.0;
  const double tol = smax * 1e-13;
  std::vector<bool> missing(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    if (sigma[j] <= tol) {
      missing[j] = true;
      sigma[j] = 0.0;
      continue;
    }
    for (std::size_t i = 0; i < g.rows(); ++i) g(i, j) /= sigma[j];
  }
  complete_orthonormal(g, missing);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  // Tall case: a = g diag(sigma) v^T. Wide case: a^T = g diag(sigma) v^T.
  const DenseMatrix& left = wide ? v : g;
  const DenseMatrix& right = wide ? g : v;
  SvdFactors f;
  f.u = DenseMatrix(left.rows(), n);
  f.vt = DenseMatrix(n, right.rows());
  f.sigma.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    f.sigma[k] = sigma[src];
    for (std::size_t i = 0; i < left.rows(); ++i) f.u(i, k) = left(i, src);
    for (std::size_t j = 0; j < right.rows(); ++j) f.vt(k, j) = right(j, src);
  }
  return f;
}

SvdFactors truncated_svd(const DenseMatrix& m, std::size_t k, std::uint64_t seed,
                         const TruncatedSvdOptions& options) {
  const std::size_t p = std::min(m.rows(), m.cols());
  if (k < 1 || k > p) {
    throw Error("truncated_svd: rank " + std::to_string(k) + " outside [1, " + std::to_string(p) +
                "] for a " + shape_string(m) + " matrix");
  }
  const std::size_t l = std::min(k + options.oversampling, p);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DenseMatrix omega(m.cols(), l);
  for (double& x : omega.values()) x = normal(rng);

  DenseMatrix q = orthonormal_basis(matmul(m, omega));
  for (std::size_t it = 0; it < options.power_iterations; ++it) {
    DenseMatrix z = orthonormal_basis(matmul_tn(m, q));
    q = orthonormal_basis(matmul(m, z));
  }
  DenseMatrix b = matmul_tn(q, m);  // l x n
  SvdFactors small = jacobi_svd(b);
  DenseMatrix u_full = matmul(q, small.u);

  SvdFactors f;
  f.sigma.assign(small.sigma.begin(), small.sigma.begin() + static_cast<std::ptrdiff_t>(k));
  f.u = DenseMatrix(m.rows(), k);
  f.vt = DenseMatrix(k, m.cols());
  for (std::size_t c = 0; c < k; ++c) {
    auto vrow = small.vt.row(c);
    std::size_t arg = 0;
    for (std::size_t j = 1; j < vrow.size(); ++j)
      if (std::abs(vrow[j]) > std::abs(vrow[arg])) arg = j;
    const double sign = vrow[arg] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < vrow.size(); ++j) f.vt(c, j) = sign * vrow[j];
    for (std::size_t i = 0; i < m.rows(); ++i) f.u(i, c) = sign * u_full(i, c);
  }
  return f;
}

std::size_t numerical_rank(const std::vector<double>& sigma, double rel_tol) {
  if (sigma.empty()) return 0;
  const double smax = *std::max_element(sigma.begin(), sigma.end());
  return static_cast<std::size_t>(
      std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s > rel_tol * smax; }));
}

}  // namespace aaerec
