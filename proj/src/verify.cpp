#include "hsicssl/verify.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "hsicssl/error.h"
#include "hsicssl/features.h"
#include "hsicssl/hsic.h"
#include "hsicssl/losses.h"
#include "hsicssl/oracles/oracles.h"
#include "hsicssl/rng.h"

namespace hsicssl {

namespace {

using Clock = std::chrono::steady_clock;

Matrix random_matrix(Rng& rng, Eigen::Index n, Eigen::Index d) {
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.normal();
  return m;
}

// A raw pair whose second view is a noisy copy of the first with a random
// per-instance coupling, so correlations span the whole [-1, 1] range.
std::pair<Matrix, Matrix> random_raw_pair(Rng& rng, Eigen::Index n, Eigen::Index d) {
  const Matrix x = random_matrix(rng, n, d);
  const double mix = rng.uniform(-1.0, 1.0);
  const Matrix y = mix * x + random_matrix(rng, n, d) * rng.uniform(0.05, 1.5);
  return {x, y};
}

// Redraws until no column is constant (n = 2 can tie).
std::pair<FeatureBatch, FeatureBatch> random_feature_pair(Rng& rng, Eigen::Index n,
                                                          Eigen::Index d) {
  for (;;) {
    auto [x, y] = random_raw_pair(rng, n, d);
    const ColumnStats sx = column_stats(x, kDefaultStdEps), sy = column_stats(y, kDefaultStdEps);
    if (sx.std.minCoeff() < 1e-3 || sy.std.minCoeff() < 1e-3) continue;
    return {standardize(RawBatch(x)), standardize(RawBatch(y))};
  }
}

Eigen::Index draw(Rng& rng, Eigen::Index lo, Eigen::Index hi) {
  return lo + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

class Suite {
 public:
  explicit Suite(VerifyReport& report) : report_(report) {}

  // Runs `body`, which returns the worst observation, and records pass/fail.
  void check(std::string family, std::string name, double tolerance,
             const std::function<double(std::string&)>& body) {
    CheckResult r;
    r.family = std::move(family);
    r.name = std::move(name);
    r.tolerance = tolerance;
    const auto t0 = Clock::now();
    try {
      r.observed = body(r.detail);
      r.passed = std::isfinite(r.observed) && r.observed <= tolerance;
    } catch (const std::exception& e) {
      r.observed = std::numeric_limits<double>::quiet_NaN();
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    report_.checks.push_back(std::move(r));
  }

 private:
  VerifyReport& report_;
};

void linear_kernel_identity(Suite& s, std::uint64_t seed, double perturb) {
  s.check("hsic_linear_identity", "fast_path_equals_centered_gram_trace", 1e-9,
          [&](std::string& detail) {
            Rng rng(seed, 1);
            double worst = 0.0;
            int count = 0;
            for (; count < 240; ++count) {
              const Eigen::Index n = draw(rng, 2, 64), d = draw(rng, 1, 16);
              const auto [x, y] = random_feature_pair(rng, n, d);
              const double fast = hsic_linear_fast(x, y) + perturb;
              const double full = hsic_empirical(gram(x, KernelSpec::linear()),
                                                 gram(y, KernelSpec::linear()));
              worst = std::max(worst, std::abs(fast - full) / (1.0 + std::abs(full)));
            }
            detail = std::to_string(count) + " pairs, n in [2,64], d in [1,16]; error / (1 + value)";
            return worst;
          });
}

void estimator_vs_index_sum(Suite& s, std::uint64_t seed) {
  for (const bool rbf : {false, true}) {
    s.check("hsic_estimator_oracle", rbf ? "rbf_kernel" : "linear_kernel", 1e-10,
            [&](std::string& detail) {
              Rng rng(seed, rbf ? 3 : 2);
              double worst = 0.0;
              for (int t = 0; t < 60; ++t) {
                const Eigen::Index n = draw(rng, 2, 8), d = draw(rng, 1, 4);
                const auto [x, y] = random_feature_pair(rng, n, d);
                KernelSpec spec = KernelSpec::linear();
                if (rbf) {
                  spec = (t % 2 == 0) ? KernelSpec::rbf_median()
                                      : KernelSpec::rbf(rng.uniform(0.3, 3.0));
                }
                const GramMatrix kx = gram(x, spec), ky = gram(y, spec);
                const Matrix ox = rbf ? oracle::gram_rbf(x.data(), kx.sigma) : oracle::gram_linear(x.data());
                const Matrix oy = rbf ? oracle::gram_rbf(y.data(), ky.sigma) : oracle::gram_linear(y.data());
                worst = std::max(worst, (kx.k - ox).cwiseAbs().maxCoeff());
                worst = std::max(worst, (ky.k - oy).cwiseAbs().maxCoeff());
                const double fast = hsic_empirical(kx, ky);
                worst = std::max(worst, std::abs(fast - oracle::hsic_quadruple_sum(kx.k, ky.k)));
              }
              detail = "60 instances, n <= 8; Gram entries and estimator vs quadruple index sum";
              return worst;
            });
  }
}

void centering(Suite& s, std::uint64_t seed) {
  s.check("centering", "idempotent_annihilates_ones_and_noop_on_mean_zero_gram", 1e-9,
          [&](std::string& detail) {
            Rng rng(seed, 4);
            double worst = 0.0;
            for (int t = 0; t < 50; ++t) {
              const Eigen::Index n = draw(rng, 2, 32), d = draw(rng, 1, 8);
              const Matrix h = centering_matrix(n);
              worst = std::max(worst, (h * h - h).cwiseAbs().maxCoeff());
              worst = std::max(worst, (h * Vector::Ones(n)).cwiseAbs().maxCoeff());
              const auto [x, y] = random_feature_pair(rng, n, d);
              const Matrix k = gram(x, KernelSpec::linear()).k;
              const double scale = 1.0 + k.cwiseAbs().maxCoeff();
              worst = std::max(worst, (k * h - k).cwiseAbs().maxCoeff() / scale);
              const Matrix kr = random_matrix(rng, n, n);
              worst = std::max(worst, (double_center(kr) - h * kr * h).cwiseAbs().maxCoeff());
            }
            detail = "HH = H, H1 = 0, XX^T H = XX^T (relative), row/col centering = HKH";
            return worst;
          });
}

void view_distance(Suite& s, std::uint64_t seed) {
  s.check("view_distance_identity", "squared_distance_equals_2nd_minus_2n_trace", 1e-8,
          [&](std::string& detail) {
            Rng rng(seed, 5);
            double worst = 0.0;
            for (int t = 0; t < 120; ++t) {
              const Eigen::Index n = draw(rng, 2, 64), d = draw(rng, 1, 16);
              const auto [x, y] = random_feature_pair(rng, n, d);
              const ViewDistance v = squared_view_distance(x, y);
              const double direct = oracle::squared_distance(x.data(), y.data());
              worst = std::max(worst, std::abs(direct - v.trace_identity) / (1.0 + direct));
              worst = std::max(worst, std::abs(direct - v.dist) / (1.0 + direct));
            }
            detail = "120 pairs; |dist - (2nd - 2n tr C)| / (1 + dist)";
            return worst;
          });
  s.check("view_distance_identity", "self_pair_trace_equals_d", 1e-9, [&](std::string& detail) {
    Rng rng(seed, 6);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Eigen::Index n = draw(rng, 2, 64), d = draw(rng, 1, 16);
      const auto [x, y] = random_feature_pair(rng, n, d);
      (void)y;
      const ViewDistance v = squared_view_distance(x, x);
      worst = std::max(worst, std::abs(cross_correlation(x, x).c.trace() - static_cast<double>(d)));
      worst = std::max(worst, std::abs(v.dist));
    }
    detail = "X = Y: |tr C - d| and ||X - X||^2";
    return worst;
  });
}

void gradients(Suite& s, std::uint64_t seed) {
  for (const LossKind kind : {LossKind::BarlowTwins, LossKind::HsicSsl}) {
    for (const bool through : {false, true}) {
      const std::string name = std::string(to_string(kind)) +
                               (through ? "_through_standardization" : "_corr_chain_only");
      s.check("gradient_check", name, 1e-5, [&, kind, through](std::string& detail) {
        Rng rng(seed, 10 + 2 * static_cast<std::uint64_t>(kind) + (through ? 1 : 0));
        const double off_target = kind == LossKind::HsicSsl ? -1.0 : 0.0;
        double worst = 0.0;
        const int instances = 60;
        for (int t = 0; t < instances; ++t) {
          const Eigen::Index n = draw(rng, 3, 12), d = draw(rng, 1, 5);
          const Lambda lam = (t % 3 == 0)   ? Lambda::explicit_value(0.005)
                             : (t % 3 == 1) ? default_lambda(static_cast<long>(d))
                                            : Lambda::explicit_value(rng.uniform(0.01, 2.0));
          auto [x, y] = random_raw_pair(rng, n, d);
          if (!through) {
            x = oracle::standardize(x);
            y = oracle::standardize(y);
          }
          const LossReport rep = loss_gradients(x, y, kind, lam, through);
          auto loss_of = [&](const Matrix& a, const Matrix& b) {
            const Matrix sa = through ? oracle::standardize(a) : a;
            const Matrix sb = through ? oracle::standardize(b) : b;
            return oracle::redundancy_loss(oracle::cross_correlation(sa, sb), lam.value, off_target)
                .total;
          };
          const Matrix fx = oracle::central_difference(
              [&](const Matrix& a) { return loss_of(a, y); }, x, 1e-5);
          const Matrix fy = oracle::central_difference(
              [&](const Matrix& b) { return loss_of(x, b); }, y, 1e-5);
          worst = std::max(worst, oracle::max_relative_error(rep.grad_x, fx));
          worst = std::max(worst, oracle::max_relative_error(rep.grad_y, fy));
        }
        detail = std::to_string(instances) + " instances, central differences step 1e-5";
        return worst;
      });
    }
  }
}

void closed_forms(Suite& s) {
  s.check("closed_form_values", "identity_and_all_ones", 1e-12, [&](std::string& detail) {
    double worst = 0.0;
    for (long d = 1; d <= 16; ++d) {
      const double dd = static_cast<double>(d);
      for (const Lambda lam : {default_lambda(d), Lambda::explicit_value(0.005)}) {
        const double pairs = lam.value * dd * (dd - 1.0);
        CorrMatrix eye{Matrix::Identity(d, d), 8};
        CorrMatrix ones{Matrix::Ones(d, d), 8};
        worst = std::max(worst, std::abs(barlow_twins_loss(eye, lam).total - 0.0));
        worst = std::max(worst, std::abs(hsic_ssl_loss(eye, lam).total - pairs));
        worst = std::max(worst, std::abs(barlow_twins_loss(ones, lam).total - pairs));
        worst = std::max(worst, std::abs(hsic_ssl_loss(ones, lam).total - 4.0 * pairs));
        worst = std::max(worst, std::abs(ones.c.squaredNorm() - dd * dd));
        CorrMatrix hsic_min{Matrix::Constant(d, d, -1.0), 8};
        hsic_min.c.diagonal().setOnes();
        worst = std::max(worst, std::abs(hsic_ssl_loss(hsic_min, lam).total));
      }
    }
    detail = "d = 1..16, lambda in {1/d, 0.005}; C = I, C = 11^T, HSIC_SSL minimizer";
    return worst;
  });
}

void loss_vs_oracle(Suite& s, std::uint64_t seed) {
  s.check("loss_oracle", "terms_match_scalar_loops_and_off_diagonal_relation", 1e-10,
          [&](std::string& detail) {
            Rng rng(seed, 20);
            double worst = 0.0;
            for (int t = 0; t < 100; ++t) {
              const Eigen::Index n = draw(rng, 2, 64), d = draw(rng, 1, 16);
              const auto [x, y] = random_feature_pair(rng, n, d);
              const CorrMatrix c = cross_correlation(x, y);
              const Lambda lam = Lambda::explicit_value(rng.uniform(0.001, 1.0));
              const LossTerms bt = barlow_twins_loss(c, lam), hs = hsic_ssl_loss(c, lam);
              const auto obt = oracle::redundancy_loss(c.c, lam.value, 0.0);
              const auto ohs = oracle::redundancy_loss(c.c, lam.value, -1.0);
              worst = std::max({worst, std::abs(bt.total - obt.total), std::abs(hs.total - ohs.total)});
              if (bt.on_diag != hs.on_diag) worst = std::max(worst, 1.0);
              double rel = 0.0;
              for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j)
                  if (i != j) rel += 1.0 + 2.0 * c.c(i, j);
              worst = std::max(worst, std::abs((hs.off_diag - bt.off_diag) - rel));
              worst = std::max(worst, (c.c - oracle::cross_correlation(x.data(), y.data()))
                                          .cwiseAbs()
                                          .maxCoeff());
            }
            detail = "100 random C; oracle totals, shared diagonal, off-diag difference = sum(1 + 2C_ij)";
            return worst;
          });
}

void correlation_bounds(Suite& s, std::uint64_t seed) {
  s.check("correlation_bounds", "entries_within_unit_interval_and_unit_self_diagonal", 1e-9,
          [&](std::string& detail) {
            Rng rng(seed, 30);
            double worst = 0.0;
            for (int t = 0; t < 120; ++t) {
              const Eigen::Index n = draw(rng, 2, 64), d = draw(rng, 1, 16);
              const auto [x, y] = random_feature_pair(rng, n, d);
              worst = std::max(worst, cross_correlation(x, y).c.cwiseAbs().maxCoeff() - 1.0);
              const Matrix self = cross_correlation(x, x).c;
              worst = std::max(worst, (self.diagonal().array() - 1.0).abs().maxCoeff());
            }
            detail = "120 pairs; max(|C_ij| - 1) and |diag(C(X,X)) - 1|";
            return worst;
          });
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

bool VerifyReport::all_passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::size_t VerifyReport::family_count() const {
  std::set<std::string> f;
  for (const auto& c : checks) f.insert(c.family);
  return f.size();
}

VerifyReport run_verification(const VerifyOptions& opts) {
  VerifyReport report;
  const auto t0 = Clock::now();
  Suite s(report);
  linear_kernel_identity(s, opts.seed, opts.perturb_hsic_fast);
  estimator_vs_index_sum(s, opts.seed);
  centering(s, opts.seed);
  view_distance(s, opts.seed);
  gradients(s, opts.seed);
  closed_forms(s);
  loss_vs_oracle(s, opts.seed);
  correlation_bounds(s, opts.seed);
  report.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return report;
}

std::string format_report(const VerifyReport& report) {
  std::ostringstream out;
  for (const auto& c : report.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.family << '/' << c.name << "  observed "
        << fmt(c.observed) << " <= " << fmt(c.tolerance) << "  (" << c.detail << ")\n";
  }
  std::size_t failed = 0;
  for (const auto& c : report.checks) failed += c.passed ? 0 : 1;
  out << report.checks.size() - failed << '/' << report.checks.size() << " checks passed across "
      << report.family_count() << " families in " << fmt(report.seconds) << " s\n";
  return out.str();
}

void write_report_csv(const VerifyReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "family,check,passed,observed,tolerance,seconds,detail\n";
  char buf[64];
  for (const auto& c : report.checks) {
    out << c.family << ',' << c.name << ',' << (c.passed ? 1 : 0) << ',';
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.6f", c.observed, c.tolerance, c.seconds);
    out << buf << ',' << csv_escape(c.detail) << '\n';
  }
}

}  // namespace hsicssl
