#pragma once

#include <vector>

#include "hsicssl/matrix.h"

namespace hsicssl {

inline constexpr double kDefaultStdEps = 1e-8;

/// One view of a batch before standardization: n samples x d dimensions,
/// n >= 2, all entries finite. Construction validates.
class RawBatch {
 public:
  explicit RawBatch(Matrix data);

  const Matrix& data() const { return data_; }
  Eigen::Index n() const { return data_.rows(); }
  Eigen::Index d() const { return data_.cols(); }

 private:
  Matrix data_;
};

/// Column-standardized batch (population std, divisor n). Only standardize()
/// produces one from raw data; wrap() is for values already known to satisfy
/// the invariant (e.g. test fixtures).
class FeatureBatch {
 public:
  static FeatureBatch wrap(Matrix data);

  const Matrix& data() const { return data_; }
  Eigen::Index n() const { return data_.rows(); }
  Eigen::Index d() const { return data_.cols(); }

  /// Columns whose std fell below eps during standardization.
  const std::vector<Eigen::Index>& degenerate_columns() const { return degenerate_; }

 private:
  friend FeatureBatch standardize(const RawBatch&, double);
  FeatureBatch(Matrix data, std::vector<Eigen::Index> degenerate)
      : data_(std::move(data)), degenerate_(std::move(degenerate)) {}

  Matrix data_;
  std::vector<Eigen::Index> degenerate_;
};

/// d x d empirical cross-correlation C = X^T Y / n.
struct CorrMatrix {
  Matrix c;
  Eigen::Index n = 0;

  Eigen::Index d() const { return c.rows(); }
};

/// Per-column statistics used by standardize(). Exposed so the gradient code
/// can reuse exactly the same forward pass.
struct ColumnStats {
  RowVector mean;
  RowVector std;      // population std
  RowVector divisor;  // max(std, eps)
};

ColumnStats column_stats(const Matrix& data, double eps);

/// (x - mean) / max(std, eps) per column. Constant columns are not an error;
/// they are listed in FeatureBatch::degenerate_columns() and a warning is
/// logged.
FeatureBatch standardize(const RawBatch& raw, double eps = kDefaultStdEps);

CorrMatrix cross_correlation(const FeatureBatch& x, const FeatureBatch& y);

}  // namespace hsicssl
