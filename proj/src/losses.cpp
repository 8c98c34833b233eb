#include "hsicssl/losses.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "hsicssl/error.h"

namespace hsicssl {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::BarlowTwins:
      return "barlow_twins";
    case LossKind::HsicSsl:
      return "hsic_ssl";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view text) {
  std::string norm;
  for (char ch : text) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    norm.push_back(c == '-' ? '_' : c);
  }
  if (norm == "barlow_twins" || norm == "barlowtwins" || norm == "bt") return LossKind::BarlowTwins;
  if (norm == "hsic_ssl" || norm == "hsicssl" || norm == "hsic") return LossKind::HsicSsl;
  throw ConfigError("unknown loss kind '" + std::string(text) +
                    "' (expected barlow_twins or hsic_ssl)");
}

Lambda Lambda::explicit_value(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("lambda must be positive and finite");
  return {v, LambdaOrigin::Explicit};
}

Lambda default_lambda(long d) {
  if (d < 1) throw InvalidInputError("default_lambda needs d >= 1, got " + std::to_string(d));
  return {1.0 / static_cast<double>(d), LambdaOrigin::OneOverD};
}

namespace {

void require_square(const CorrMatrix& c) {
  if (c.c.rows() != c.c.cols()) {
    throw DimensionError("correlation matrix must be square, got " + std::to_string(c.c.rows()) +
                         "x" + std::to_string(c.c.cols()));
  }
}

// off_target is 0 for Barlow Twins and -1 for HSIC_SSL.
LossTerms diag_offdiag_loss(const CorrMatrix& c, Lambda lam, double off_target) {
  require_square(c);
  LossTerms t;
  const Eigen::Index d = c.c.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i == j) {
        const double r = 1.0 - c.c(i, i);
        t.on_diag += r * r;
      } else {
        const double r = c.c(i, j) - off_target;
        t.off_diag += r * r;
      }
    }
  }
  t.total = t.on_diag + lam.value * t.off_diag;
  return t;
}

double off_target(LossKind kind) { return kind == LossKind::HsicSsl ? -1.0 : 0.0; }

}  // namespace

LossTerms barlow_twins_loss(const CorrMatrix& c, Lambda lam) {
  return diag_offdiag_loss(c, lam, 0.0);
}

LossTerms hsic_ssl_loss(const CorrMatrix& c, Lambda lam) {
  return diag_offdiag_loss(c, lam, -1.0);
}

LossTerms evaluate_loss(LossKind kind, const CorrMatrix& c, Lambda lam) {
  return diag_offdiag_loss(c, lam, off_target(kind));
}

Matrix loss_grad_wrt_corr(LossKind kind, const Matrix& c, Lambda lam) {
  const double target = off_target(kind);
  Matrix g = (2.0 * lam.value) * (c.array() - target).matrix();
  for (Eigen::Index i = 0; i < c.rows(); ++i) g(i, i) = -2.0 * (1.0 - c(i, i));
  return g;
}

namespace {

// Backward of X = (R - mean) / max(std, eps) with population statistics.
Matrix standardization_backward(const Matrix& grad_std, const Matrix& standardized,
                                const ColumnStats& stats, double eps) {
  const RowVector mean_g = grad_std.colwise().mean();
  const RowVector mean_gx = grad_std.cwiseProduct(standardized).colwise().mean();
  Matrix out(grad_std.rows(), grad_std.cols());
  for (Eigen::Index j = 0; j < grad_std.cols(); ++j) {
    if (stats.std(j) < eps) {
      // Divisor is the constant eps; only the mean depends on the input.
      out.col(j) = (grad_std.col(j).array() - mean_g(j)) / eps;
    } else {
      out.col(j) = (grad_std.col(j).array() - mean_g(j) -
                    standardized.col(j).array() * mean_gx(j)) /
                   stats.std(j);
    }
  }
  return out;
}

}  // namespace

LossReport loss_gradients(const Matrix& x, const Matrix& y, LossKind kind, Lambda lam,
                          bool through_standardization, double eps) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("loss_gradients shape mismatch: " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + " vs " + std::to_string(y.rows()) + "x" +
                         std::to_string(y.cols()));
  }
  if (x.rows() < 1 || x.cols() < 1) throw DimensionError("loss_gradients on empty views");
  const double n = static_cast<double>(x.rows());

  ColumnStats sx, sy;
  Matrix xs, ys;
  if (through_standardization) {
    if (x.rows() < 2) throw InvalidInputError("standardization needs at least 2 samples");
    sx = column_stats(x, eps);
    sy = column_stats(y, eps);
    xs = (x.rowwise() - sx.mean).array().rowwise() / sx.divisor.array();
    ys = (y.rowwise() - sy.mean).array().rowwise() / sy.divisor.array();
  } else {
    xs = x;
    ys = y;
  }

  LossReport report;
  report.corr.n = x.rows();
  report.corr.c = xs.transpose() * ys / n;
  report.terms = evaluate_loss(kind, report.corr, lam);

  const Matrix g = loss_grad_wrt_corr(kind, report.corr.c, lam);
  // C_ij = sum_k X_ki Y_kj / n
  Matrix gx = ys * g.transpose() / n;
  Matrix gy = xs * g / n;
  if (through_standardization) {
    report.grad_x = standardization_backward(gx, xs, sx, eps);
    report.grad_y = standardization_backward(gy, ys, sy, eps);
  } else {
    report.grad_x = std::move(gx);
    report.grad_y = std::move(gy);
  }
  return report;
}

LossReport loss_gradients(const FeatureBatch& x, const FeatureBatch& y, LossKind kind,
                          Lambda lam) {
  return loss_gradients(x.data(), y.data(), kind, lam, false);
}

ViewDistance squared_view_distance(const FeatureBatch& x, const FeatureBatch& y) {
  const CorrMatrix c = cross_correlation(x, y);
  const double n = static_cast<double>(x.n());
  const double d = static_cast<double>(x.d());
  ViewDistance out;
  out.dist = (x.data() - y.data()).squaredNorm();
  out.trace_identity = 2.0 * n * d - 2.0 * n * c.c.trace();
  if (std::abs(out.dist - out.trace_identity) > 1e-8 * (1.0 + out.dist)) {
    throw InvalidInputError("squared-distance trace identity violated (inputs not standardized?)");
  }
  return out;
}

}  // namespace hsicssl
