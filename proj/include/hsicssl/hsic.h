#pragma once

#include <optional>

#include "hsicssl/features.h"
#include "hsicssl/matrix.h"

namespace hsicssl {

enum class KernelKind { Linear, Rbf };

/// Kernel choice for Gram construction. The RBF kernel is an extension used
/// to exercise the kernel-generic estimator; the loss derivations only need
/// the linear kernel. An RBF spec without a bandwidth uses the median
/// heuristic (median pairwise Euclidean distance).
struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  std::optional<double> bandwidth;

  static KernelSpec linear() { return {}; }
  static KernelSpec rbf(double sigma);
  static KernelSpec rbf_median() { return {KernelKind::Rbf, std::nullopt}; }
};

struct GramMatrix {
  Matrix k;
  KernelSpec spec;
  double sigma = 0.0;  // resolved RBF bandwidth, 0 for linear

  Eigen::Index n() const { return k.rows(); }
};

GramMatrix gram(const FeatureBatch& x, const KernelSpec& spec);

/// Median of the n(n-1)/2 pairwise distances (lower median for even counts).
double median_pairwise_distance(const Matrix& x);

/// H K H computed by subtracting row means, column means and adding back the
/// grand mean. O(n^2), no n x n centering matrix is formed.
Matrix double_center(const Matrix& k);

/// Biased empirical HSIC, tr(K_X H K_Y H) / n^2.
double hsic_empirical(const GramMatrix& kx, const GramMatrix& ky);

/// Linear-kernel HSIC through the d x d cross-correlation: ||X^T Y / n||_F^2.
/// Agrees with hsic_empirical on linear Grams of standardized inputs.
double hsic_linear_fast(const FeatureBatch& x, const FeatureBatch& y);

/// Materialized I - 11^T / n. Only used by tests and the verification suite.
Matrix centering_matrix(Eigen::Index n);

}  // namespace hsicssl
