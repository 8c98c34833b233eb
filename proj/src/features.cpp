#include "hsicssl/features.h"

#include <cmath>
#include <iostream>
#include <sstream>

#include "hsicssl/error.h"

namespace hsicssl {

RawBatch::RawBatch(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 2) {
    throw InvalidInputError("raw batch needs at least 2 samples, got " +
                            std::to_string(data_.rows()));
  }
  if (data_.cols() < 1) throw InvalidInputError("raw batch needs at least 1 column");
  if (!data_.allFinite()) throw InvalidInputError("raw batch contains non-finite values");
}

FeatureBatch FeatureBatch::wrap(Matrix data) {
  if (data.rows() < 1 || data.cols() < 1) throw InvalidInputError("empty feature batch");
  if (!data.allFinite()) throw InvalidInputError("feature batch contains non-finite values");
  return FeatureBatch(std::move(data), {});
}

ColumnStats column_stats(const Matrix& data, double eps) {
  ColumnStats s;
  const double n = static_cast<double>(data.rows());
  s.mean = data.colwise().sum() / n;
  s.std = ((data.rowwise() - s.mean).array().square().colwise().sum() / n).sqrt();
  s.divisor = s.std.cwiseMax(eps);
  return s;
}

FeatureBatch standardize(const RawBatch& raw, double eps) {
  if (!(eps > 0.0)) throw InvalidInputError("standardization eps must be positive");
  const ColumnStats s = column_stats(raw.data(), eps);

  std::vector<Eigen::Index> degenerate;
  for (Eigen::Index j = 0; j < raw.d(); ++j) {
    if (s.std(j) < eps) degenerate.push_back(j);
  }
  if (!degenerate.empty()) {
    std::ostringstream msg;
    msg << "warning: degenerate-column count=" << degenerate.size() << " columns=";
    for (std::size_t i = 0; i < degenerate.size(); ++i) msg << (i ? "," : "") << degenerate[i];
    std::clog << msg.str() << '\n';
  }

  Matrix out = (raw.data().rowwise() - s.mean).array().rowwise() / s.divisor.array();
  return FeatureBatch(std::move(out), std::move(degenerate));
}

CorrMatrix cross_correlation(const FeatureBatch& x, const FeatureBatch& y) {
  if (x.n() != y.n() || x.d() != y.d()) {
    throw DimensionError("cross_correlation shape mismatch: " + std::to_string(x.n()) + "x" +
                         std::to_string(x.d()) + " vs " + std::to_string(y.n()) + "x" +
                         std::to_string(y.d()));
  }
  CorrMatrix out;
  out.n = x.n();
  out.c = x.data().transpose() * y.data() / static_cast<double>(x.n());
  return out;
}

}  // namespace hsicssl
