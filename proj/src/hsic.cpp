#include "hsicssl/hsic.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hsicssl/error.h"

namespace hsicssl {

KernelSpec KernelSpec::rbf(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidInputError("RBF bandwidth must be positive and finite");
  }
  return {KernelKind::Rbf, sigma};
}

double median_pairwise_distance(const Matrix& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw InvalidInputError("median heuristic needs at least 2 rows");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) dist.push_back((x.row(a) - x.row(b)).norm());
  }
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>((dist.size() - 1) / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  return *mid;
}

GramMatrix gram(const FeatureBatch& x, const KernelSpec& spec) {
  GramMatrix g;
  g.spec = spec;
  const Matrix& data = x.data();
  const Eigen::Index n = data.rows();

  if (spec.kind == KernelKind::Linear) {
    g.k = data * data.transpose();
    return g;
  }

  double sigma;
  if (spec.bandwidth) {
    sigma = *spec.bandwidth;
    if (!(sigma > 0.0)) throw InvalidInputError("RBF bandwidth must be positive");
  } else {
    sigma = median_pairwise_distance(data);
    if (!(sigma > 0.0)) {
      throw DegenerateBandwidthError(
          "median heuristic bandwidth is 0 (rows are identical); pass an explicit bandwidth");
    }
  }
  g.sigma = sigma;
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  g.k.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    g.k(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double v = std::exp(-(data.row(a) - data.row(b)).squaredNorm() * inv_two_sigma_sq);
      g.k(a, b) = v;
      g.k(b, a) = v;
    }
  }
  return g;
}

Matrix double_center(const Matrix& k) {
  const double n = static_cast<double>(k.rows());
  const Vector row_mean = k.rowwise().sum() / n;
  const RowVector col_mean = k.colwise().sum() / n;
  const double grand = col_mean.sum() / n;
  Matrix out = k;
  out.colwise() -= row_mean;
  out.rowwise() -= col_mean;
  out.array() += grand;
  return out;
}

double hsic_empirical(const GramMatrix& kx, const GramMatrix& ky) {
  if (kx.k.rows() != kx.k.cols() || ky.k.rows() != ky.k.cols()) {
    throw DimensionError("Gram matrices must be square");
  }
  if (kx.n() != ky.n()) {
    throw DimensionError("Gram size mismatch: " + std::to_string(kx.n()) + " vs " +
                         std::to_string(ky.n()));
  }
  // tr(Kx H Ky H) = tr((H Kx H)(H Ky H)) because H is idempotent; the trace of a
  // product is the elementwise sum of A o B^T. Both orderings are summed so
  // that swapping the arguments gives a bitwise-identical result.
  const Matrix cx = double_center(kx.k);
  const Matrix cy = double_center(ky.k);
  const double n = static_cast<double>(kx.n());
  const double forward = cx.cwiseProduct(cy.transpose()).sum();
  const double backward = cy.cwiseProduct(cx.transpose()).sum();
  return 0.5 * (forward + backward) / (n * n);
}

double hsic_linear_fast(const FeatureBatch& x, const FeatureBatch& y) {
  return cross_correlation(x, y).c.squaredNorm();
}

Matrix centering_matrix(Eigen::Index n) {
  if (n < 1) throw InvalidInputError("centering matrix size must be positive");
  return Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

}  // namespace hsicssl
