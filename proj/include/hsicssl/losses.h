#pragma once

#include <string_view>

#include "hsicssl/features.h"
#include "hsicssl/matrix.h"

namespace hsicssl {

enum class LossKind { BarlowTwins, HsicSsl };

std::string_view to_string(LossKind kind);
/// Accepts "barlow_twins" / "hsic_ssl" (case-insensitive, '-' or '_').
LossKind parse_loss_kind(std::string_view text);

enum class LambdaOrigin { Explicit, OneOverD };

/// Off-diagonal trade-off weight.
struct Lambda {
  double value = 0.0;
  LambdaOrigin origin = LambdaOrigin::Explicit;

  static Lambda explicit_value(double v);
};

/// lambda = 1/d, balancing the d on-diagonal against the d(d-1) off-diagonal
/// terms.
Lambda default_lambda(long d);

struct LossTerms {
  double total = 0.0;
  double on_diag = 0.0;
  double off_diag = 0.0;
};

/// sum_i (1 - C_ii)^2 + lambda * sum_{i != j} C_ij^2
LossTerms barlow_twins_loss(const CorrMatrix& c, Lambda lam);

/// sum_i (1 - C_ii)^2 + lambda * sum_{i != j} (1 + C_ij)^2
LossTerms hsic_ssl_loss(const CorrMatrix& c, Lambda lam);

LossTerms evaluate_loss(LossKind kind, const CorrMatrix& c, Lambda lam);

/// dLoss/dC for the given kind, evaluated at c.
Matrix loss_grad_wrt_corr(LossKind kind, const Matrix& c, Lambda lam);

struct LossReport {
  LossTerms terms;
  Matrix grad_x;
  Matrix grad_y;
  CorrMatrix corr;
};

/// Loss value plus exact gradients w.r.t. both view matrices.
///
/// With through_standardization set, x and y are raw (unstandardized) views:
/// they are standardized with batch statistics inside, and the gradient flows
/// back through the batch mean and std the way a normalization layer's
/// backward pass would. Without it, x and y are used as-is (normally already
/// standardized) and only the C = X^T Y / n chain rule is applied.
LossReport loss_gradients(const Matrix& x, const Matrix& y, LossKind kind, Lambda lam,
                          bool through_standardization, double eps = kDefaultStdEps);

LossReport loss_gradients(const FeatureBatch& x, const FeatureBatch& y, LossKind kind,
                          Lambda lam);

struct ViewDistance {
  double dist = 0.0;            // ||X - Y||_F^2
  double trace_identity = 0.0;  // 2nd - 2n tr(C)
};

/// Squared distance between the views and the same quantity through the
/// trace of C. With unit population std columns ||X||_F^2 = nd, so the two
/// agree up to rounding. Throws InvalidInputError when they do not.
ViewDistance squared_view_distance(const FeatureBatch& x, const FeatureBatch& y);

}  // namespace hsicssl
