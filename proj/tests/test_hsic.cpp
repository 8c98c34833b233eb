#include <cmath>

#include "doctest.h"
#include "hsicssl/error.h"
#include "hsicssl/hsic.h"
#include "hsicssl/oracles/oracles.h"
#include "support.h"

using namespace hsicssl;
using hsicssl::testing::from_rows;
using hsicssl::testing::gaussian;

namespace {

// Fixed 5x2 pair used for frozen numpy values.
FeatureBatch fixed_x() {
  return standardize(RawBatch(from_rows({{1, 2}, {3, -1}, {0, 0}, {5, 4}, {-2, 1}})));
}
FeatureBatch fixed_y() {
  return standardize(RawBatch(from_rows({{2, 1}, {1, 1}, {0, 3}, {4, -2}, {-1, 0}})));
}

GramMatrix wrap_gram(Matrix k) { return GramMatrix{std::move(k), KernelSpec::linear(), 0.0}; }

}  // namespace

TEST_CASE("linear gram of a two-point batch") {
  const GramMatrix g = gram(FeatureBatch::wrap(from_rows({{1}, {-1}})), KernelSpec::linear());
  CHECK(g.k == from_rows({{1, -1}, {-1, 1}}));
}

TEST_CASE("rbf gram has a unit diagonal and matches the oracle") {
  const FeatureBatch x = hsicssl::testing::standardized(5, 9, 3);
  for (const KernelSpec spec : {KernelSpec::rbf(0.7), KernelSpec::rbf_median()}) {
    const GramMatrix g = gram(x, spec);
    for (Eigen::Index i = 0; i < g.n(); ++i) CHECK(g.k(i, i) == 1.0);
    CHECK(g.sigma > 0.0);
    CHECK((g.k - oracle::gram_rbf(x.data(), g.sigma)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((g.k - g.k.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("linear gram matches frozen values and the dot-product oracle") {
  const GramMatrix g = gram(fixed_x(), KernelSpec::linear());
  // numpy X @ X.T, first row
  CHECK(std::abs(g.k(0, 0) - 0.24361347649018886) <= 1e-12);
  CHECK(std::abs(g.k(0, 1) - -0.7041836356904851) <= 1e-12);
  CHECK(std::abs(g.k(3, 3) - 4.867826730840428) <= 1e-12);
  CHECK(std::abs(g.k(3, 4) - -2.285079600148093) <= 1e-12);
  CHECK((g.k - oracle::gram_linear(fixed_x().data())).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("grams are positive semidefinite") {
  const FeatureBatch x = hsicssl::testing::standardized(8, 12, 4);
  for (const KernelSpec spec : {KernelSpec::linear(), KernelSpec::rbf_median()}) {
    const GramMatrix g = gram(x, spec);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(g.k));
    CHECK(es.eigenvalues().minCoeff() >= -1e-7 * g.k.norm());
  }
}

TEST_CASE("median heuristic rejects identical rows") {
  const FeatureBatch x = FeatureBatch::wrap(from_rows({{0.5, 1}, {0.5, 1}, {0.5, 1}}));
  CHECK_THROWS_AS(gram(x, KernelSpec::rbf_median()), DegenerateBandwidthError);
  CHECK_NOTHROW(gram(x, KernelSpec::rbf(1.0)));
  CHECK_THROWS_AS(KernelSpec::rbf(0.0), InvalidInputError);
}

TEST_CASE("hsic_empirical examples") {
  const GramMatrix k = gram(FeatureBatch::wrap(from_rows({{1}, {-1}})), KernelSpec::linear());
  CHECK(hsic_empirical(k, k) == doctest::Approx(1.0).epsilon(1e-15));

  const GramMatrix kx = gram(hsicssl::testing::standardized(3, 6, 2), KernelSpec::linear());
  CHECK(std::abs(hsic_empirical(kx, wrap_gram(Matrix::Constant(6, 6, 3.7)))) <= 1e-12);

  CHECK_THROWS_AS(hsic_empirical(kx, wrap_gram(Matrix::Identity(5, 5))), DimensionError);
}

TEST_CASE("hsic_empirical matches frozen numpy value (linear and rbf)") {
  const double lin = hsic_empirical(gram(fixed_x(), KernelSpec::linear()),
                                    gram(fixed_y(), KernelSpec::linear()));
  CHECK(std::abs(lin - 2.178110922002073) <= 1e-12);
  const double rbf = hsic_empirical(gram(fixed_x(), KernelSpec::rbf(1.5)),
                                    gram(fixed_y(), KernelSpec::rbf(1.5)));
  CHECK(std::abs(rbf - 0.06245182520911742) <= 1e-12);
}

TEST_CASE("hsic_empirical matches the quadruple index sum on seeded n=6 grams") {
  const Matrix a = gaussian(40, 6, 6), b = gaussian(41, 6, 6);
  const GramMatrix kx = wrap_gram(a * a.transpose()), ky = wrap_gram(b * b.transpose());
  CHECK(std::abs(hsic_empirical(kx, ky) - oracle::hsic_quadruple_sum(kx.k, ky.k)) <= 1e-10);
}

TEST_CASE("double centering equals the literal H K H") {
  const Matrix k = gaussian(50, 7, 7);
  const Matrix h = centering_matrix(7);
  CHECK((double_center(k) - h * k * h).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((h * h - h).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((h * Vector::Ones(7)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("hsic_linear_fast examples") {
  const FeatureBatch x = standardize(RawBatch(from_rows({{1}, {-1}})));
  CHECK(hsic_linear_fast(x, x) == 1.0);

  // [1,-1,1,-1] and [1,1,-1,-1] are orthogonal, mean zero, unit std.
  const FeatureBatch a = standardize(RawBatch(from_rows({{1}, {-1}, {1}, {-1}})));
  const FeatureBatch b = standardize(RawBatch(from_rows({{1}, {1}, {-1}, {-1}})));
  CHECK(std::abs(hsic_linear_fast(a, b)) <= 1e-12);

  CHECK_THROWS_AS(hsic_linear_fast(a, hsicssl::testing::standardized(1, 5, 1)), DimensionError);
}

TEST_CASE("hsic_linear_fast agrees with the estimator and the index-sum oracle on 16x4") {
  const Matrix base = gaussian(60, 16, 4);
  const FeatureBatch x = standardize(RawBatch(base));
  const FeatureBatch y = hsicssl::testing::correlated_view(61, base, 0.7);
  const double fast = hsic_linear_fast(x, y);
  const GramMatrix kx = gram(x, KernelSpec::linear()), ky = gram(y, KernelSpec::linear());
  CHECK(std::abs(fast - hsic_empirical(kx, ky)) <= 1e-9 * (1 + fast));
  CHECK(std::abs(fast - oracle::hsic_quadruple_sum(oracle::gram_linear(x.data()),
                                                   oracle::gram_linear(y.data()))) <=
        1e-9 * (1 + fast));
}

TEST_CASE("property: linear identity, symmetry, non-negativity, constant shift") {
  Rng rng(123);
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<Eigen::Index>(2 + rng.below(63));
    const auto d = static_cast<Eigen::Index>(1 + rng.below(16));
    const Matrix base = gaussian(5000 + t, n, d);
    const FeatureBatch x = standardize(RawBatch(base));
    const FeatureBatch y = hsicssl::testing::correlated_view(6000 + t, base, rng.uniform(0.1, 2));
    const GramMatrix kx = gram(x, KernelSpec::linear()), ky = gram(y, KernelSpec::linear());
    const double full = hsic_empirical(kx, ky);
    CHECK(std::abs(hsic_linear_fast(x, y) - full) <= 1e-9 * (1 + std::abs(full)));
    CHECK(hsic_empirical(ky, kx) == full);
    CHECK(full >= -1e-9);

    // XX^T H == XX^T for mean-zero X
    const Matrix h = centering_matrix(n);
    CHECK((kx.k * h - kx.k).cwiseAbs().maxCoeff() <= 1e-9 * (1 + kx.k.cwiseAbs().maxCoeff()));

    const double c = rng.uniform(-5, 5);
    GramMatrix shifted = kx;
    shifted.k.array() += c;
    CHECK(std::abs(hsic_empirical(shifted, ky) - full) <= 1e-9);
  }
}
