#include "hsicssl/oracles/oracles.h"

#include <algorithm>
#include <cmath>

namespace hsicssl::oracle {

Matrix standardize(const Matrix& raw, double eps) {
  const long n = raw.rows(), d = raw.cols();
  Matrix out(n, d);
  for (long j = 0; j < d; ++j) {
    double mean = 0.0;
    for (long i = 0; i < n; ++i) mean += raw(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (long i = 0; i < n; ++i) var += (raw(i, j) - mean) * (raw(i, j) - mean);
    var /= static_cast<double>(n);
    const double sd = std::max(std::sqrt(var), eps);
    for (long i = 0; i < n; ++i) out(i, j) = (raw(i, j) - mean) / sd;
  }
  return out;
}

Matrix cross_correlation(const Matrix& x, const Matrix& y) {
  const long n = x.rows(), d = x.cols();
  Matrix c(d, d);
  for (long i = 0; i < d; ++i) {
    for (long j = 0; j < d; ++j) {
      double s = 0.0;
      for (long k = 0; k < n; ++k) s += x(k, i) * y(k, j);
      c(i, j) = s / static_cast<double>(n);
    }
  }
  return c;
}

Matrix gram_linear(const Matrix& x) {
  const long n = x.rows();
  Matrix k(n, n);
  for (long a = 0; a < n; ++a) {
    for (long b = 0; b < n; ++b) {
      double s = 0.0;
      for (long j = 0; j < x.cols(); ++j) s += x(a, j) * x(b, j);
      k(a, b) = s;
    }
  }
  return k;
}

Matrix gram_rbf(const Matrix& x, double sigma) {
  const long n = x.rows();
  Matrix k(n, n);
  for (long a = 0; a < n; ++a) {
    for (long b = 0; b < n; ++b) {
      double s = 0.0;
      for (long j = 0; j < x.cols(); ++j) s += (x(a, j) - x(b, j)) * (x(a, j) - x(b, j));
      k(a, b) = std::exp(-s / (2.0 * sigma * sigma));
    }
  }
  return k;
}

double hsic_quadruple_sum(const Matrix& kx, const Matrix& ky) {
  const long n = kx.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  auto h = [inv_n](long a, long b) { return (a == b ? 1.0 : 0.0) - inv_n; };
  double s = 0.0;
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b)
      for (long c = 0; c < n; ++c)
        for (long e = 0; e < n; ++e) s += kx(a, b) * h(b, c) * ky(c, e) * h(e, a);
  return s / static_cast<double>(n * n);
}

Terms redundancy_loss(const Matrix& c, double lambda, double off_target) {
  Terms t;
  for (long i = 0; i < c.rows(); ++i) {
    t.on += (1.0 - c(i, i)) * (1.0 - c(i, i));
    for (long j = 0; j < c.cols(); ++j) {
      if (j != i) t.off += (c(i, j) - off_target) * (c(i, j) - off_target);
    }
  }
  t.total = t.on + lambda * t.off;
  return t;
}

double squared_distance(const Matrix& x, const Matrix& y) {
  double s = 0.0;
  for (long i = 0; i < x.rows(); ++i)
    for (long j = 0; j < x.cols(); ++j) s += (x(i, j) - y(i, j)) * (x(i, j) - y(i, j));
  return s;
}

Matrix central_difference(const std::function<double(const Matrix&)>& f, const Matrix& x,
                          double step) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (long i = 0; i < x.rows(); ++i) {
    for (long j = 0; j < x.cols(); ++j) {
      const double orig = probe(i, j);
      probe(i, j) = orig + step;
      const double up = f(probe);
      probe(i, j) = orig - step;
      const double down = f(probe);
      probe(i, j) = orig;
      g(i, j) = (up - down) / (2.0 * step);
    }
  }
  return g;
}

double max_relative_error(const Matrix& a, const Matrix& b) {
  double diff = 0.0, scale = 0.0;
  for (long i = 0; i < a.rows(); ++i) {
    for (long j = 0; j < a.cols(); ++j) {
      diff = std::max(diff, std::abs(a(i, j) - b(i, j)));
      scale = std::max({scale, std::abs(a(i, j)), std::abs(b(i, j))});
    }
  }
  return scale < 1e-10 ? diff : diff / scale;
}

}  // namespace hsicssl::oracle
