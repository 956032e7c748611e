#include <doctest.h>

#include <cmath>

#include "aaerec/error.hpp"
#include "aaerec/linalg.hpp"
#include "support.hpp"

using namespace aaerec;

namespace {

SparseBinaryMatrix rows_of(std::size_t n, std::vector<std::vector<std::uint32_t>> r) {
  return SparseBinaryMatrix::from_rows(n, r);
}

double rel_error(const DenseMatrix& m, const SvdFactors& f) {
  DenseMatrix diff = f.reconstruct();
  for (std::size_t k = 0; k < diff.size(); ++k) diff.values()[k] -= m.values()[k];
  return frobenius_norm(diff) / frobenius_norm(m);
}

double orthonormality_defect(const DenseMatrix& q_cols) {
  DenseMatrix g = matmul_tn(q_cols, q_cols);
  return testing::max_abs_diff(g, DenseMatrix::identity(g.rows()));
}

}  // namespace

TEST_CASE("sparse binary construction") {
  auto x = rows_of(4, {{2, 0}, {}, {3}});
  CHECK(x.rows() == 3);
  CHECK(x.nnz() == 3);
  CHECK(x.row(0)[0] == 0);  // sorted
  CHECK(x.contains(0, 2));
  CHECK_FALSE(x.contains(1, 0));
  CHECK_THROWS_AS(rows_of(3, {{1, 1}}), Error);
  CHECK_THROWS_AS(rows_of(3, {{3}}), Error);
  CHECK(SparseBinaryMatrix::from_dense(x.to_dense()) == x);
  CHECK(x.column_counts() == std::vector<std::size_t>{1, 0, 1, 1});
}

TEST_CASE("gram on the hand example") {
  auto c = gram(rows_of(3, {{0, 1}, {0, 2}}));
  CHECK(c == DenseMatrix(3, 3, {2, 1, 1, 1, 1, 0, 1, 0, 1}));
  CHECK(gram(rows_of(2, {{0, 1}})) == DenseMatrix(2, 2, 1.0));
  CHECK_THROWS_AS(gram(SparseBinaryMatrix(3)), Error);
  CHECK_THROWS_AS(gram(rows_of(kMaxGramItems + 1, {{0}})), CapacityError);
}

TEST_CASE("gram is symmetric with column counts on the diagonal") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    auto x = testing::random_binary(1 + uniform_index(rng, 25), 1 + uniform_index(rng, 15), 0.3, rng);
    auto c = gram(x);
    CHECK(c == c.transposed());
    auto counts = x.column_counts();
    for (std::size_t k = 0; k < x.cols(); ++k) CHECK(c(k, k) == static_cast<double>(counts[k]));
  }
}

TEST_CASE("spmm") {
  DenseMatrix d(2, 2, {1, 2, 3, 4});
  CHECK(spmm(rows_of(2, {{0, 1}}), d) == DenseMatrix(1, 2, {4, 6}));
  CHECK(spmm(rows_of(2, {{0}, {1}}), d) == d);
  CHECK(spmm(SparseBinaryMatrix(2), d).rows() == 0);
  try {
    spmm(rows_of(3, {{0}}), d);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("1x3") != std::string::npos);
    CHECK(std::string(e.what()).find("2x2") != std::string::npos);
  }
}

TEST_CASE("spmm agrees with a triple loop") {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    auto x = testing::random_binary(20, 20, 0.3, rng);
    auto d = testing::random_dense(20, 20, rng);
    auto dx = x.to_dense();
    DenseMatrix naive(20, 20);
    for (std::size_t i = 0; i < 20; ++i)
      for (std::size_t j = 0; j < 20; ++j)
        for (std::size_t k = 0; k < 20; ++k) naive(i, j) += dx(i, k) * d(k, j);
    CHECK(testing::max_abs_diff(spmm(x, d), naive) < 1e-12);
  }
}

TEST_CASE("dense products") {
  Rng rng(2);
  auto a = testing::random_dense(4, 3, rng);
  auto b = testing::random_dense(4, 5, rng);
  CHECK(testing::max_abs_diff(matmul_tn(a, b), matmul(a.transposed(), b)) < 1e-14);
  auto c = testing::random_dense(5, 3, rng);
  CHECK(testing::max_abs_diff(matmul_nt(a, c), matmul(a, c.transposed())) < 1e-14);
  CHECK_THROWS_AS(matmul(a, a), ShapeError);
}

TEST_CASE("orthonormal basis") {
  Rng rng(3);
  auto a = testing::random_dense(8, 3, rng);
  auto q = orthonormal_basis(a);
  CHECK(q.cols() == 3);
  CHECK(orthonormality_defect(q) < 1e-12);
  // Rank deficient: duplicated column.
  DenseMatrix r(5, 2);
  for (std::size_t i = 0; i < 5; ++i) r(i, 0) = r(i, 1) = static_cast<double>(i + 1);
  CHECK(orthonormality_defect(orthonormal_basis(r)) < 1e-12);
}

TEST_CASE("singular values match an independent solver") {
  // numpy.linalg.svd on the same matrix.
  DenseMatrix m(4, 3, {4, 0, 1, 2, 3, 0, 0, 1, 5, 1, 1, 1});
  const std::vector<double> expected = {5.770835695853434, 4.340363755059272, 2.6189115764438458};
  for (const auto& f : {jacobi_svd(m), truncated_svd(m, 3, 1)}) {
    REQUIRE(f.sigma.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(f.sigma[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
  auto wide = jacobi_svd(m.transposed());
  for (std::size_t i = 0; i < 3; ++i) CHECK(wide.sigma[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("truncated svd examples") {
  DenseMatrix d(3, 3, {3, 0, 0, 0, 2, 0, 0, 0, 1});
  auto f = truncated_svd(d, 2, 7);
  CHECK(f.sigma[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(f.sigma[1] == doctest::Approx(2.0).epsilon(1e-9));

  Rng rng(9);
  auto full = testing::random_dense(12, 7, rng);
  CHECK(rel_error(full, truncated_svd(full, 7, 1)) < 1e-6);

  DenseMatrix outer(6, 5);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 5; ++j) outer(i, j) = (1.0 + i) * (0.5 - j);
  CHECK(rel_error(outer, truncated_svd(outer, 1, 3)) < 1e-6);

  CHECK_THROWS_AS(truncated_svd(full, 0, 1), Error);
  CHECK_THROWS_AS(truncated_svd(full, 8, 1), Error);
}

TEST_CASE("truncated svd factors are orthonormal and signed") {
  Rng rng(4);
  auto m = testing::random_dense(30, 20, rng);
  auto f = truncated_svd(m, 6, 2);
  CHECK(orthonormality_defect(f.u) < 1e-6);
  CHECK(orthonormality_defect(f.vt.transposed()) < 1e-6);
  for (std::size_t i = 0; i + 1 < f.sigma.size(); ++i) CHECK(f.sigma[i] >= f.sigma[i + 1]);
  for (std::size_t i = 0; i < f.vt.rows(); ++i) {
    auto row = f.vt.row(i);
    auto big = std::max_element(row.begin(), row.end(),
                                [](double a, double b) { return std::abs(a) < std::abs(b); });
    CHECK(*big > 0.0);
  }
}

TEST_CASE("truncated svd error is non-increasing in k") {
  Rng rng(6);
  auto m = testing::random_dense(25, 15, rng);
  double previous = 1e300;
  for (std::size_t k = 1; k <= 15; ++k) {
    const double e = rel_error(m, truncated_svd(m, k, 3));
    CHECK(e <= previous + 1e-9);
    previous = e;
  }
}

TEST_CASE("truncated svd is reproducible") {
  Rng rng(8);
  auto m = testing::random_dense(40, 18, rng);
  auto a = truncated_svd(m, 5, 42);
  auto b = truncated_svd(m, 5, 42);
  CHECK(testing::max_abs_diff(a.vt, b.vt) < 1e-10);
  CHECK(testing::max_abs_diff(a.u, b.u) < 1e-10);
  // On an exactly rank-5 matrix any sketch seed recovers the same factors.
  auto low = matmul(testing::random_dense(40, 5, rng), testing::random_dense(5, 18, rng));
  CHECK(testing::max_abs_diff(truncated_svd(low, 5, 42).vt, truncated_svd(low, 5, 43).vt) < 1e-8);
}

TEST_CASE("numerical rank") {
  CHECK(numerical_rank({3.0, 1.0, 1e-14}) == 2);
  CHECK(numerical_rank({}) == 0);
  CHECK(numerical_rank({0.0, 0.0}) == 0);
}
