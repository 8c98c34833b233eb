#pragma once

#include <cstdint>

#include "hsicssl/features.h"
#include "hsicssl/rng.h"

namespace hsicssl::testing {

inline Matrix gaussian(std::uint64_t seed, Eigen::Index n, Eigen::Index d) {
  Rng rng(seed);
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.normal();
  return m;
}

inline FeatureBatch standardized(std::uint64_t seed, Eigen::Index n, Eigen::Index d) {
  return standardize(RawBatch(gaussian(seed, n, d)));
}

// Second view correlated with the first.
inline FeatureBatch correlated_view(std::uint64_t seed, const Matrix& base, double noise) {
  return standardize(RawBatch(base + noise * gaussian(seed, base.rows(), base.cols())));
}

inline Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace hsicssl::testing
