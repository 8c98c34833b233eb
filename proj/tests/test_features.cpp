#include <cmath>

#include "doctest.h"
#include "hsicssl/error.h"
#include "hsicssl/features.h"
#include "hsicssl/oracles/oracles.h"
#include "support.h"

using namespace hsicssl;
using hsicssl::testing::from_rows;
using hsicssl::testing::gaussian;

TEST_CASE("standardize two-row examples") {
  const FeatureBatch a = standardize(RawBatch(from_rows({{0}, {2}})));
  CHECK(a.data()(0, 0) == -1.0);
  CHECK(a.data()(1, 0) == 1.0);

  const FeatureBatch b = standardize(RawBatch(from_rows({{1}, {-1}})));
  CHECK(b.data()(0, 0) == 1.0);
  CHECK(b.data()(1, 0) == -1.0);
}

TEST_CASE("standardize 3x2 matches frozen values and the scalar oracle") {
  const Matrix raw = from_rows({{1, 10}, {2, 20}, {6, 30}});
  const Matrix got = standardize(RawBatch(raw)).data();
  // numpy: (r - r.mean(0)) / r.std(0)
  const Matrix frozen = from_rows({{-0.9258200997725514, -1.224744871391589},
                                   {-0.4629100498862757, 0.0},
                                   {1.3887301496588271, 1.224744871391589}});
  CHECK((got - frozen).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((got - oracle::standardize(raw)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("standardized columns have mean 0 and population std 1") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FeatureBatch f = standardize(RawBatch(gaussian(seed, 2 + seed * 3, 1 + seed % 7)));
    const RowVector mean = f.data().colwise().mean();
    const RowVector sd = (f.data().array().square().colwise().mean()).sqrt();
    CHECK(mean.cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((sd.array() - 1.0).abs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("standardize is idempotent") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FeatureBatch once = standardize(RawBatch(gaussian(seed, 17, 5)));
    const FeatureBatch twice = standardize(RawBatch(once.data()));
    CHECK((once.data() - twice.data()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("constant column is guarded and reported, not fatal") {
  const Matrix raw = from_rows({{1, 5}, {2, 5}, {3, 5}});
  const FeatureBatch f = standardize(RawBatch(raw));
  REQUIRE(f.degenerate_columns().size() == 1);
  CHECK(f.degenerate_columns()[0] == 1);
  CHECK(f.data().col(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.data().allFinite());
}

TEST_CASE("raw batch validation") {
  CHECK_THROWS_AS(RawBatch(from_rows({{1, 2}})), InvalidInputError);
  Matrix bad = from_rows({{1}, {2}});
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(RawBatch{bad}, InvalidInputError);
  bad(1, 0) = INFINITY;
  CHECK_THROWS_AS(RawBatch{bad}, InvalidInputError);
  CHECK_THROWS_AS(standardize(RawBatch(from_rows({{1}, {2}})), 0.0), InvalidInputError);
}

TEST_CASE("cross_correlation examples") {
  const FeatureBatch x = standardize(RawBatch(from_rows({{1}, {-1}})));
  const FeatureBatch y = standardize(RawBatch(from_rows({{-1}, {1}})));
  CHECK(cross_correlation(x, x).c(0, 0) == 1.0);
  CHECK(cross_correlation(x, y).c(0, 0) == -1.0);
}

TEST_CASE("cross_correlation matches the triple-loop oracle on seeded 8x3 batches") {
  const FeatureBatch x = hsicssl::testing::standardized(11, 8, 3);
  const FeatureBatch y = hsicssl::testing::standardized(12, 8, 3);
  const CorrMatrix c = cross_correlation(x, y);
  CHECK(c.n == 8);
  CHECK((c.c - oracle::cross_correlation(x.data(), y.data())).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("cross_correlation rejects shape mismatch") {
  const FeatureBatch x = hsicssl::testing::standardized(1, 8, 3);
  CHECK_THROWS_AS(cross_correlation(x, hsicssl::testing::standardized(2, 9, 3)), DimensionError);
  CHECK_THROWS_AS(cross_correlation(x, hsicssl::testing::standardized(2, 8, 2)), DimensionError);
}

TEST_CASE("property: |C| <= 1, unit self-diagonal, column-sign equivariance") {
  Rng rng(77);
  for (int t = 0; t < 120; ++t) {
    const auto n = static_cast<Eigen::Index>(2 + rng.below(63));
    const auto d = static_cast<Eigen::Index>(1 + rng.below(16));
    const Matrix base = gaussian(1000 + t, n, d);
    const FeatureBatch x = standardize(RawBatch(base));
    const FeatureBatch y =
        hsicssl::testing::correlated_view(2000 + t, base, rng.uniform(0.0, 2.0));
    const CorrMatrix c = cross_correlation(x, y);
    CHECK(c.c.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
    CHECK((cross_correlation(x, x).c.diagonal().array() - 1.0).abs().maxCoeff() <= 1e-9);

    const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(d)));
    Matrix flipped = y.data();
    flipped.col(j) *= -1.0;
    const CorrMatrix cf = cross_correlation(x, FeatureBatch::wrap(flipped));
    CHECK(cf.c.col(j) == (-c.c.col(j)).eval());
    for (Eigen::Index k = 0; k < d; ++k)
      if (k != j) CHECK(cf.c.col(k) == c.c.col(k));
  }
}
