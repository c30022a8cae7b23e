#include "eiv/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eiv/errors.hpp"
#include "eiv/numerics.hpp"

namespace eiv {

namespace {

double vec_mean(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

// Sample covariance of two columns, divisor n-1.
double cov2(std::span<const double> a, std::span<const double> b) {
  const double ma = vec_mean(a), mb = vec_mean(b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - ma) * (b[i] - mb);
  return acc / static_cast<double>(a.size() - 1);
}

double sd(std::span<const double> v) { return std::sqrt(cov2(v, v)); }

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

void check_same_length(std::span<const double> x, std::span<const double> y,
                       const char* where) {
  if (x.size() != y.size()) throw ShapeError(std::string(where) + ": length mismatch");
}

}  // namespace

RegressionFit ols_fit(const DataMatrix& x, std::span<const double> y) {
  const std::size_t n = x.rows(), p = x.cols();
  if (y.size() != n) throw ShapeError("ols_fit: y length mismatch");
  if (n <= p + 1) throw DegenerateSampleError("ols_fit: need n > p + 1");
  const std::size_t q = p + 1;

  // Normal equations on the design [1 X].
  SymmetricMatrix xtx(q);
  std::vector<double> xty(q, 0.0);
  xtx.set(0, 0, static_cast<double>(n));
  for (std::size_t j = 0; j < p; ++j) {
    double s = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += x(i, j);
      sy += x(i, j) * y[i];
    }
    xtx.set(0, j + 1, s);
    xty[j + 1] = sy;
  }
  for (std::size_t i = 0; i < n; ++i) xty[0] += y[i];
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = j; k < p; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += x(i, j) * x(i, k);
      xtx.set(j + 1, k + 1, s);
    }

  Cholesky chol = [&] {
    try {
      return Cholesky(xtx);
    } catch (const SingularSystemError&) {
      throw SingularSystemError("ols_fit: singular design");
    }
  }();
  const std::vector<double> coef = chol.solve(xty);

  RegressionFit fit;
  fit.method = "ols";
  fit.intercept = coef[0];
  fit.slopes.assign(coef.begin() + 1, coef.end());
  fit.residuals.resize(n);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = coef[0];
    for (std::size_t j = 0; j < p; ++j) pred += coef[j + 1] * x(i, j);
    fit.residuals[i] = y[i] - pred;
    rss += fit.residuals[i] * fit.residuals[i];
  }
  const double ybar = vec_mean(y);
  double tss = 0.0;
  for (double v : y) tss += (v - ybar) * (v - ybar);
  fit.r_squared = tss > 0.0 ? clamp01(1.0 - rss / tss) : 1.0;

  const double sigma2 = rss / static_cast<double>(n - q);
  const SymmetricMatrix xtx_inv = chol.inverse();
  fit.stderr_intercept = std::sqrt(sigma2 * xtx_inv(0, 0));
  fit.stderr_slopes.resize(p);
  for (std::size_t j = 0; j < p; ++j)
    fit.stderr_slopes[j] = std::sqrt(sigma2 * xtx_inv(j + 1, j + 1));
  return fit;
}

std::vector<double> hc3_stderr(const DataMatrix& x, std::span<const double> y,
                               const RegressionFit& fit) {
  const std::size_t n = x.rows(), p = x.cols(), q = p + 1;
  if (y.size() != n || fit.residuals.size() != n)
    throw ShapeError("hc3_stderr: fit does not match the data");

  SymmetricMatrix xtx(q);
  xtx.set(0, 0, static_cast<double>(n));
  for (std::size_t j = 0; j < p; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x(i, j);
    xtx.set(0, j + 1, s);
  }
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = j; k < p; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += x(i, j) * x(i, k);
      xtx.set(j + 1, k + 1, s);
    }
  const SymmetricMatrix a_inv = Cholesky(xtx).inverse();

  // meat = sum_i d_i x~_i x~_i' with d_i = e_i^2 / (1 - h_ii)^2.
  SymmetricMatrix meat(q);
  std::vector<double> xi(q);
  std::vector<double> meat_acc(q * q, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    xi[0] = 1.0;
    for (std::size_t j = 0; j < p; ++j) xi[j + 1] = x(i, j);
    double h = 0.0;
    for (std::size_t a = 0; a < q; ++a)
      for (std::size_t b = 0; b < q; ++b) h += xi[a] * a_inv(a, b) * xi[b];
    if (h >= 1.0 - 1e-12)
      throw SingularSystemError("hc3_stderr: leverage at or above 1");
    const double d = fit.residuals[i] * fit.residuals[i] / ((1.0 - h) * (1.0 - h));
    for (std::size_t a = 0; a < q; ++a)
      for (std::size_t b = a; b < q; ++b) meat_acc[a * q + b] += d * xi[a] * xi[b];
  }
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = a; b < q; ++b) meat.set(a, b, meat_acc[a * q + b]);

  std::vector<double> se(q, 0.0);
  for (std::size_t a = 0; a < q; ++a) {
    double acc = 0.0;
    for (std::size_t r = 0; r < q; ++r)
      for (std::size_t s = 0; s < q; ++s) acc += a_inv(a, r) * meat(r, s) * a_inv(s, a);
    se[a] = std::sqrt(acc);
  }
  return se;
}

RegressionFit orthogonal_fit(std::span<const double> x, std::span<const double> y) {
  check_same_length(x, y, "orthogonal_fit");
  const std::size_t n = x.size();
  if (n < 3) throw DegenerateSampleError("orthogonal_fit: need n >= 3");

  SymmetricMatrix cov(2);
  cov.set(0, 0, cov2(x, x));
  cov.set(0, 1, cov2(x, y));
  cov.set(1, 1, cov2(y, y));
  const EighResult eg = eigh(cov);
  const double v1 = eg.eigenvectors(0, 0);
  const double v2 = eg.eigenvectors(1, 0);
  if (std::abs(v2) < 1e-12)
    throw DegenerateDataError("orthogonal_fit: principal axis is vertical");

  RegressionFit fit;
  fit.method = "or";
  fit.slopes = {-v1 / v2};
  fit.intercept = vec_mean(y) - fit.slopes[0] * vec_mean(x);
  fit.stderr_slopes = {std::numeric_limits<double>::quiet_NaN()};
  fit.residuals.resize(n);
  double rss = 0.0, tss = 0.0;
  const double ybar = vec_mean(y);
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = y[i] - fit.intercept - fit.slopes[0] * x[i];
    rss += fit.residuals[i] * fit.residuals[i];
    tss += (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r_squared = tss > 0.0 ? clamp01(1.0 - rss / tss) : 1.0;
  return fit;
}

RegressionFit geom_fit(std::span<const double> x, std::span<const double> y) {
  check_same_length(x, y, "geom_fit");
  if (x.size() < 3) throw DegenerateSampleError("geom_fit: need n >= 3");
  const double sx = sd(x), sy = sd(y);
  if (!(sx > 0.0)) throw DegenerateSampleError("geom_fit: sd(x) must be positive");
  const double c = cov2(x, y);
  if (c == 0.0 || sy == 0.0)
    throw DegenerateDataError("geom_fit: zero correlation, slope sign indeterminate");

  RegressionFit fit;
  fit.method = "geom";
  fit.slopes = {(c > 0.0 ? 1.0 : -1.0) * sy / sx};
  fit.intercept = vec_mean(y) - fit.slopes[0] * vec_mean(x);
  fit.stderr_slopes = {std::numeric_limits<double>::quiet_NaN()};
  fit.residuals.resize(x.size());
  double rss = 0.0, tss = 0.0;
  const double ybar = vec_mean(y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    fit.residuals[i] = y[i] - fit.intercept - fit.slopes[0] * x[i];
    rss += fit.residuals[i] * fit.residuals[i];
    tss += (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r_squared = tss > 0.0 ? clamp01(1.0 - rss / tss) : 1.0;
  return fit;
}

RegressionFit instrumental_fit(std::span<const double> w, std::span<const double> y,
                               std::span<const double> instrument, const std::string& method) {
  check_same_length(w, y, "instrumental_fit");
  check_same_length(w, instrument, "instrumental_fit");
  const double cgw = cov2(instrument, w);
  const double sg = sd(instrument), sw = sd(w);
  if (std::abs(cgw) < 1e-10 * sg * sw)
    throw WeakInstrumentError(method + ": instrument uncorrelated with the regressor");

  RegressionFit fit;
  fit.method = method;
  fit.slopes = {cov2(instrument, y) / cgw};
  fit.intercept = vec_mean(y) - fit.slopes[0] * vec_mean(w);
  fit.stderr_slopes = {std::numeric_limits<double>::quiet_NaN()};
  fit.residuals.resize(w.size());
  double rss = 0.0, tss = 0.0;
  const double ybar = vec_mean(y);
  for (std::size_t i = 0; i < w.size(); ++i) {
    fit.residuals[i] = y[i] - fit.intercept - fit.slopes[0] * w[i];
    rss += fit.residuals[i] * fit.residuals[i];
    tss += (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r_squared = tss > 0.0 ? clamp01(1.0 - rss / tss) : 1.0;
  return fit;
}

RegressionFit moment_iv_fit(std::span<const double> w, std::span<const double> y) {
  check_same_length(w, y, "moment_iv_fit");
  if (w.size() < 10) throw DegenerateSampleError("moment_iv_fit: need n >= 10");
  std::vector<double> g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) g[i] = w[i] * w[i];
  return instrumental_fit(w, y, g, "iv");
}

RegressionFit rank_iv_fit(std::span<const double> w, std::span<const double> y) {
  check_same_length(w, y, "rank_iv_fit");
  if (w.size() < 10) throw DegenerateSampleError("rank_iv_fit: need n >= 10");
  const std::vector<double> ranks = average_ranks(w);
  const double cgw = cov2(ranks, w);
  if (cgw == 0.0) throw DegenerateDataError("rank_iv_fit: constant regressor");
  return instrumental_fit(w, y, ranks, "rankiv");
}

double attenuation_limit(double var_x, double frac, double mu_u, double sd_u) {
  if (frac < 0.0 || frac >= 0.5)
    throw ParameterError("attenuation_limit: frac must lie in [0, 0.5)");
  if (!(var_x > 0.0)) throw ParameterError("attenuation_limit: var_x must be positive");
  const double masked_var = frac * (sd_u * sd_u + mu_u * mu_u) - frac * frac * mu_u * mu_u;
  return var_x / (var_x + masked_var);
}

std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace eiv
