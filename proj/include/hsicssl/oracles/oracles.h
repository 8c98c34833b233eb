#pragma once

// Reference implementations written as plain index loops, sharing no code
// with the production path. The verification suite and the tests compare
// against these.

#include <functional>

#include "hsicssl/matrix.h"

namespace hsicssl::oracle {

/// Per-column (x - mean) / max(population std, eps), scalar loops.
Matrix standardize(const Matrix& raw, double eps = 1e-8);

/// c[i][j] = (1/n) sum_k x[k][i] y[k][j], triple loop.
Matrix cross_correlation(const Matrix& x, const Matrix& y);

Matrix gram_linear(const Matrix& x);
Matrix gram_rbf(const Matrix& x, double sigma);

/// tr(Kx H Ky H) / n^2 expanded as sum_{a,b,c,e} Kx[a][b] H[b][c] Ky[c][e] H[e][a]
/// with H[a][b] = [a == b] - 1/n. O(n^4).
double hsic_quadruple_sum(const Matrix& kx, const Matrix& ky);

/// Diagonal and off-diagonal sums for the redundancy-reduction losses.
/// off_target 0 gives Barlow Twins, -1 gives HSIC_SSL.
struct Terms {
  double on = 0.0;
  double off = 0.0;
  double total = 0.0;
};
Terms redundancy_loss(const Matrix& c, double lambda, double off_target);

/// ||X - Y||_F^2 by elementwise subtraction.
double squared_distance(const Matrix& x, const Matrix& y);

/// Central differences of f at x, one coordinate at a time.
Matrix central_difference(const std::function<double(const Matrix&)>& f, const Matrix& x,
                          double step);

/// max|a - b| / max(max|a|, max|b|); falls back to the absolute difference
/// when both are below 1e-10.
double max_relative_error(const Matrix& a, const Matrix& b);

}  // namespace hsicssl::oracle
