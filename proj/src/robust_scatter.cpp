#include "eiv/robust_scatter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "eiv/errors.hpp"
#include "eiv/numerics.hpp"
#include "eiv/stats.hpp"

namespace eiv {

namespace {

constexpr double kEigFloor = 1e-12;

std::vector<double> all_distances_sq(const DataMatrix& m, const std::vector<double>& loc,
                                     const Cholesky& chol) {
  std::vector<double> d(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) d[i] = chol.mahalanobis_sq(m.row(i), loc);
  return d;
}

// Indices of the h smallest distances; ties resolved toward the smaller row
// index so the selection is reproducible under column permutations.
std::vector<std::size_t> smallest_h(const std::vector<double>& d, std::size_t h) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (d[a] != d[b]) return d[a] < d[b];
    return a < b;
  });
  order.resize(h);
  std::sort(order.begin(), order.end());
  return order;
}

ScatterEstimate subset_estimate(const DataMatrix& m, std::vector<std::size_t> support,
                                bool inherited_degenerate) {
  ScatterEstimate est;
  est.h = support.size();
  est.location = subset_mean(m, support);
  est.scatter = subset_covariance(m, support);
  est.support = std::move(support);
  est.degenerate = inherited_degenerate;
  try {
    est.determinant = Cholesky(est.scatter).determinant();
  } catch (const SingularSystemError&) {
    throw RankCollapseError("subset covariance singular (h=" + std::to_string(est.h) + ")");
  }
  return est;
}

// Correlation matrix of the columns of z (unit diagonal).
SymmetricMatrix column_correlation(const DataMatrix& z) {
  SymmetricMatrix cov = sample_covariance(z);
  const std::size_t p = cov.dim();
  std::vector<double> s(p);
  for (std::size_t j = 0; j < p; ++j) s[j] = std::sqrt(std::max(cov(j, j), 1e-300));
  SymmetricMatrix corr(p);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = j; k < p; ++k) corr.set(j, k, cov(j, k) / (s[j] * s[k]));
  return corr;
}

}  // namespace

std::size_t mcd_default_h(std::size_t n, std::size_t p, double alpha) {
  if (alpha < 0.5 || alpha > 1.0) throw ParameterError("detmcd: alpha must lie in [0.5, 1]");
  const std::size_t floor_h = (n + p + 1 + 1) / 2;  // ceil((n+p+1)/2)
  const auto ah = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n)));
  return std::min(n, std::max(ah, floor_h));
}

double mcd_consistency_factor(std::size_t h, std::size_t n, std::size_t p) {
  if (h >= n) return 1.0;
  const double ratio = static_cast<double>(h) / static_cast<double>(n);
  const double q = stats::chisq_quantile(ratio, static_cast<double>(p));
  return ratio / stats::chisq_cdf(q, static_cast<double>(p) + 2.0);
}

ScatterEstimate c_step(const DataMatrix& m, const ScatterEstimate& current) {
  const Cholesky chol(current.scatter);
  const std::vector<double> d = all_distances_sq(m, current.location, chol);
  return subset_estimate(m, smallest_h(d, current.h), current.degenerate);
}

std::vector<ScatterEstimate> six_starts(const DataMatrix& m, std::size_t h) {
  const std::size_t n = m.rows(), p = m.cols();
  if (n <= 2 * p) throw DegenerateSampleError("six_starts: need n > 2p");
  if (h == 0) h = mcd_default_h(n, p, 0.5);

  // Coordinatewise standardization by median and MAD.
  std::vector<double> med(p), mad(p);
  for (std::size_t j = 0; j < p; ++j) {
    const std::vector<double> col = m.column(j);
    med[j] = median(col);
    mad[j] = median_abs_dev(col);
    if (!(mad[j] > 0.0))
      throw DegenerateDataError("six_starts: zero MAD in coordinate " + std::to_string(j));
  }
  DataMatrix z(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) z(i, j) = (m(i, j) - med[j]) / mad[j];

  std::vector<SymmetricMatrix> starts;
  starts.reserve(6);

  // 1. Correlation of the hyperbolic-tangent transform.
  {
    DataMatrix t(n, p);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) t(i, j) = std::tanh(z(i, j));
    starts.push_back(column_correlation(t));
  }
  // 2. Spearman rank correlation.
  {
    DataMatrix r(n, p);
    for (std::size_t j = 0; j < p; ++j) {
      const std::vector<double> ranks = average_ranks(z.column(j));
      for (std::size_t i = 0; i < n; ++i) r(i, j) = ranks[i];
    }
    starts.push_back(column_correlation(r));
  }
  // 3. Normal-scores correlation.
  {
    DataMatrix t(n, p);
    const double denom = static_cast<double>(n) + 1.0 / 3.0;
    for (std::size_t j = 0; j < p; ++j) {
      const std::vector<double> ranks = average_ranks(z.column(j));
      for (std::size_t i = 0; i < n; ++i)
        t(i, j) = stats::normal_quantile((ranks[i] - 1.0 / 3.0) / denom);
    }
    starts.push_back(column_correlation(t));
  }
  // 4. Spatial-sign covariance.
  {
    SymmetricMatrix s(p);
    std::vector<double> acc(p * p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double norm = 0.0;
      const auto row = z.row(i);
      for (double v : row) norm += v * v;
      norm = std::sqrt(norm);
      if (norm == 0.0) continue;
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a; b < p; ++b) acc[a * p + b] += row[a] * row[b] / (norm * norm);
    }
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a; b < p; ++b) s.set(a, b, acc[a * p + b] / static_cast<double>(n));
    starts.push_back(s);
  }
  // 5. Covariance of the ceil(n/2) rows of smallest norm.
  {
    std::vector<double> norms(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (double v : z.row(i)) norms[i] += v * v;
    const std::vector<std::size_t> inner = smallest_h(norms, (n + 1) / 2);
    starts.push_back(subset_covariance(z, inner));
  }
  // 6. Orthogonalized pairwise (OGK-style) estimate with the MAD scale.
  {
    SymmetricMatrix u(p);
    for (std::size_t j = 0; j < p; ++j) u.set(j, j, 1.0);  // MAD of z_j is 1 by construction
    std::vector<double> sum_col(n), dif_col(n);
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = j + 1; k < p; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
          sum_col[i] = z(i, j) + z(i, k);
          dif_col[i] = z(i, j) - z(i, k);
        }
        const double sp = median_abs_dev(sum_col);
        const double sm = median_abs_dev(dif_col);
        u.set(j, k, (sp * sp - sm * sm) / 4.0);
      }
    const EighResult eg = eigh(u);
    // Project, take robust scales along the eigenvectors, rebuild.
    SymmetricMatrix s(p);
    std::vector<double> proj(n);
    std::vector<double> lam(p);
    for (std::size_t k = 0; k < p; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < p; ++j) acc += z(i, j) * eg.eigenvectors(j, k);
        proj[i] = acc;
      }
      const double scale = median_abs_dev(proj);
      lam[k] = scale * scale;
    }
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a; b < p; ++b) {
        double acc = 0.0;
        for (std::size_t k = 0; k < p; ++k)
          acc += eg.eigenvectors(a, k) * lam[k] * eg.eigenvectors(b, k);
        s.set(a, b, acc);
      }
    starts.push_back(s);
  }

  std::vector<ScatterEstimate> out;
  out.reserve(6);
  for (SymmetricMatrix& s0 : starts) {
    bool floored = false;
    SymmetricMatrix s = spd_floor(s0, kEigFloor, &floored);
    const Cholesky chol(s);
    // Location: coordinatewise median of the whitened data, mapped back.
    DataMatrix wh(n, p);
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> y = chol.forward(z.row(i));
      for (std::size_t a = 0; a < p; ++a) wh(i, a) = y[a];
    }
    std::vector<double> medw(p);
    for (std::size_t a = 0; a < p; ++a) medw[a] = median(wh.column(a));
    const std::vector<double> loc = chol.lower_times(medw);
    const std::vector<double> d = all_distances_sq(z, loc, chol);
    std::vector<std::size_t> support = smallest_h(d, h);
    // Mean/covariance of the subset in the ORIGINAL coordinates; affine
    // identity makes this equal to destandardizing the z-space estimate.
    ScatterEstimate est;
    est.h = h;
    est.support = std::move(support);
    est.location = subset_mean(m, est.support);
    SymmetricMatrix cov = subset_covariance(m, est.support);
    bool floored_subset = false;
    est.scatter = spd_floor(cov, kEigFloor, &floored_subset);
    est.degenerate = floored || floored_subset;
    est.determinant = Cholesky(est.scatter).determinant();
    out.push_back(std::move(est));
  }
  return out;
}

namespace {

// C-step chain to its fixed point; determinant is non-increasing.
ScatterEstimate concentrate(const DataMatrix& m, ScatterEstimate est) {
  for (int it = 0; it < 100; ++it) {
    ScatterEstimate next = c_step(m, est);
    const bool same_support = next.support == est.support;
    const bool det_stalled = std::abs(next.determinant - est.determinant) <
                             1e-12 * std::max(est.determinant, 1e-300);
    est = std::move(next);
    if (same_support || det_stalled) break;
  }
  return est;
}

}  // namespace

ScatterEstimate detmcd_h(const DataMatrix& m, std::size_t h) {
  const std::size_t n = m.rows(), p = m.cols();
  if (n <= 2 * p) throw DegenerateSampleError("detmcd: need n > 2p");
  if (h < p + 1 || h > n) throw ParameterError("detmcd: h out of range");

  const std::vector<ScatterEstimate> starts = six_starts(m, h);
  bool have_best = false;
  ScatterEstimate best;
  std::string first_error;
  for (const ScatterEstimate& start : starts) {
    try {
      ScatterEstimate cand = concentrate(m, start);
      if (!have_best || cand.determinant < best.determinant) {
        best = std::move(cand);
        have_best = true;
      }
    } catch (const Error& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!have_best)
    throw DegenerateDataError("detmcd: every start collapsed (" + first_error + ")");

  best.consistency_factor = mcd_consistency_factor(h, n, p);
  best.scatter = best.scatter.scaled(best.consistency_factor);
  best.consistency_applied = true;
  return best;
}

ScatterEstimate detmcd(const DataMatrix& m, double alpha) {
  return detmcd_h(m, mcd_default_h(m.rows(), m.cols(), alpha));
}

ScatterEstimate dets(const DataMatrix& m) {
  const std::size_t n = m.rows(), p = m.cols();
  if (n <= 2 * p) throw DegenerateSampleError("dets: need n > 2p");

  const double c = stats::biweight_tuning_50(p);
  const double b0 = stats::biweight_rho_max(c) / 2.0;

  const std::vector<ScatterEstimate> starts = six_starts(m);
  bool have_best = false;
  double best_sigma = 0.0;
  std::vector<double> best_loc;
  SymmetricMatrix best_shape;
  bool best_degenerate = false;
  std::string first_error;

  for (const ScatterEstimate& start : starts) {
    try {
      std::vector<double> loc = start.location;
      // det-1 shape matrix
      SymmetricMatrix shape =
          start.scatter.scaled(std::pow(1.0 / Cholesky(start.scatter).determinant(),
                                        1.0 / static_cast<double>(p)));
      double sigma = -1.0;
      std::vector<double> d(n);
      for (int it = 0; it < 200; ++it) {
        const Cholesky chol(shape);
        for (std::size_t i = 0; i < n; ++i)
          d[i] = std::sqrt(chol.mahalanobis_sq(m.row(i), loc));
        const double sigma_new = stats::mscale(d, c, b0);
        if (!(sigma_new > 0.0))
          throw RankCollapseError("dets: M-scale collapsed to zero");

        std::vector<double> w(n);
        double sw = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          w[i] = stats::biweight_weight(d[i] / sigma_new, c);
          sw += w[i];
        }
        if (!(sw > 0.0)) throw RankCollapseError("dets: all weights vanished");

        std::vector<double> loc_new(p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          if (w[i] == 0.0) continue;
          const auto row = m.row(i);
          for (std::size_t j = 0; j < p; ++j) loc_new[j] += w[i] * row[j];
        }
        for (double& v : loc_new) v /= sw;

        SymmetricMatrix cw(p);
        {
          std::vector<double> acc(p * p, 0.0);
          for (std::size_t i = 0; i < n; ++i) {
            if (w[i] == 0.0) continue;
            const auto row = m.row(i);
            for (std::size_t a = 0; a < p; ++a) {
              const double da = row[a] - loc_new[a];
              for (std::size_t b = a; b < p; ++b)
                acc[a * p + b] += w[i] * da * (row[b] - loc_new[b]);
            }
          }
          for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a; b < p; ++b) cw.set(a, b, acc[a * p + b] / sw);
        }
        const double det_cw = Cholesky(cw).determinant();
        if (!(det_cw > 0.0)) throw RankCollapseError("dets: weighted covariance singular");
        SymmetricMatrix shape_new =
            cw.scaled(std::pow(1.0 / det_cw, 1.0 / static_cast<double>(p)));

        const bool converged =
            sigma > 0.0 && std::abs(std::pow(sigma_new / sigma, 2.0 * static_cast<double>(p)) -
                                    1.0) < 1e-10;
        loc = std::move(loc_new);
        shape = std::move(shape_new);
        sigma = sigma_new;
        if (converged) break;
      }
      if (!have_best || sigma < best_sigma) {
        best_sigma = sigma;
        best_loc = loc;
        best_shape = shape;
        best_degenerate = start.degenerate;
        have_best = true;
      }
    } catch (const Error& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!have_best)
    throw DegenerateDataError("dets: every start collapsed (" + first_error + ")");

  ScatterEstimate est;
  est.location = best_loc;
  est.scatter = best_shape.scaled(best_sigma * best_sigma);
  est.determinant = std::pow(best_sigma, 2.0 * static_cast<double>(p));
  est.consistency_applied = true;  // Fisher consistency comes from the tuning constant
  est.consistency_factor = 1.0;
  est.degenerate = best_degenerate;
  // Support: rows with nonzero weight at the solution.
  {
    const Cholesky chol(best_shape);
    for (std::size_t i = 0; i < n; ++i) {
      const double dist = std::sqrt(chol.mahalanobis_sq(m.row(i), est.location));
      if (dist / best_sigma < c) est.support.push_back(i);
    }
    est.h = est.support.size();
  }
  return est;
}

RegressionFit scatter_to_regression(const ScatterEstimate& est, std::size_t dep) {
  const std::size_t p_all = est.scatter.dim();
  if (dep >= p_all) throw ShapeError("scatter_to_regression: dep index out of range");
  const std::size_t p = p_all - 1;
  if (p == 0) throw ShapeError("scatter_to_regression: no regressor block");

  std::vector<std::size_t> reg;
  reg.reserve(p);
  for (std::size_t j = 0; j < p_all; ++j)
    if (j != dep) reg.push_back(j);

  SymmetricMatrix cxx(p);
  std::vector<double> cxy(p);
  for (std::size_t a = 0; a < p; ++a) {
    cxy[a] = est.scatter(reg[a], dep);
    for (std::size_t b = a; b < p; ++b) cxx.set(a, b, est.scatter(reg[a], reg[b]));
  }

  RegressionFit fit;
  fit.method = "scatter";
  try {
    fit.slopes = solve_spd(cxx, cxy);
  } catch (const SingularSystemError&) {
    throw SingularSystemError("scatter_to_regression: singular regressor block");
  }
  double acc = est.location[dep];
  for (std::size_t a = 0; a < p; ++a) acc -= fit.slopes[a] * est.location[reg[a]];
  fit.intercept = acc;
  fit.stderr_slopes.assign(p, std::numeric_limits<double>::quiet_NaN());
  return fit;
}

}  // namespace eiv
