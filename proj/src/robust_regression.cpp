#include "eiv/robust_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eiv/errors.hpp"
#include "eiv/numerics.hpp"
#include "eiv/stats.hpp"

namespace eiv {

namespace {

// Exact fit through q = p+1 points: dense Gaussian elimination with partial
// pivoting on the design [1 X_sub]. Returns false when the subset is singular.
bool elemental_fit(const DataMatrix& x, std::span<const double> y,
                   std::span<const std::size_t> rows, std::vector<double>& coef) {
  const std::size_t q = x.cols() + 1;
  std::vector<double> a(q * q);
  std::vector<double> b(q);
  for (std::size_t r = 0; r < q; ++r) {
    a[r * q] = 1.0;
    for (std::size_t j = 0; j < x.cols(); ++j) a[r * q + j + 1] = x(rows[r], j);
    b[r] = y[rows[r]];
  }
  for (std::size_t col = 0; col < q; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < q; ++r)
      if (std::abs(a[r * q + col]) > std::abs(a[piv * q + col])) piv = r;
    if (std::abs(a[piv * q + col]) < 1e-12) return false;
    if (piv != col) {
      for (std::size_t j = 0; j < q; ++j) std::swap(a[piv * q + j], a[col * q + j]);
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < q; ++r) {
      const double f = a[r * q + col] / a[col * q + col];
      for (std::size_t j = col; j < q; ++j) a[r * q + j] -= f * a[col * q + j];
      b[r] -= f * b[col];
    }
  }
  coef.assign(q, 0.0);
  for (std::size_t ii = q; ii-- > 0;) {
    double acc = b[ii];
    for (std::size_t j = ii + 1; j < q; ++j) acc -= a[ii * q + j] * coef[j];
    coef[ii] = acc / a[ii * q + ii];
  }
  return true;
}

void compute_residuals(const DataMatrix& x, std::span<const double> y,
                       std::span<const double> coef, std::vector<double>& r) {
  const std::size_t n = x.rows(), p = x.cols();
  r.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double pred = coef[0];
    for (std::size_t j = 0; j < p; ++j) pred += coef[j + 1] * x(i, j);
    r[i] = y[i] - pred;
  }
}

// Weighted least squares via the centering trick: center regressors and
// response by their weighted means, solve the slope system, recover the
// intercept. Returns false on a singular weighted cross-product matrix.
bool weighted_ls(const DataMatrix& x, std::span<const double> y,
                 std::span<const double> w, std::vector<double>& coef) {
  const std::size_t n = x.rows(), p = x.cols();
  double sw = 0.0;
  for (double v : w) sw += v;
  if (!(sw > 0.0)) return false;
  std::vector<double> mx(p, 0.0);
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] == 0.0) continue;
    for (std::size_t j = 0; j < p; ++j) mx[j] += w[i] * x(i, j);
    my += w[i] * y[i];
  }
  for (double& v : mx) v /= sw;
  my /= sw;

  SymmetricMatrix a(p);
  std::vector<double> b(p, 0.0);
  std::vector<double> acc(p * p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] == 0.0) continue;
    for (std::size_t j = 0; j < p; ++j) {
      const double dj = x(i, j) - mx[j];
      b[j] += w[i] * dj * (y[i] - my);
      for (std::size_t k = j; k < p; ++k) acc[j * p + k] += w[i] * dj * (x(i, k) - mx[k]);
    }
  }
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = j; k < p; ++k) a.set(j, k, acc[j * p + k]);

  std::vector<double> slopes;
  try {
    slopes = solve_spd(a, b);
  } catch (const SingularSystemError&) {
    return false;
  }
  coef.assign(p + 1, 0.0);
  double inter = my;
  for (std::size_t j = 0; j < p; ++j) {
    coef[j + 1] = slopes[j];
    inter -= slopes[j] * mx[j];
  }
  coef[0] = inter;
  return true;
}

// One approximate M-scale update (fast-S style): sigma' = sigma *
// sqrt(mean rho(r/sigma) / b0). Iterating this alongside reweighted LS drives
// sigma to the exact M-scale.
double scale_step(std::span<const double> r, double sigma, double c, double b0) {
  double acc = 0.0;
  for (double v : r) acc += stats::biweight_rho(v / sigma, c);
  return sigma * std::sqrt(acc / (static_cast<double>(r.size()) * b0));
}

struct Candidate {
  std::vector<double> coef;
  double sigma = std::numeric_limits<double>::infinity();
  bool exact_fit = false;
  bool converged = false;
};

}  // namespace

double residual_mscale(std::span<const double> residuals, double c) {
  const double b0 = stats::biweight_rho_max(c) / 2.0;
  return stats::mscale(residuals, c, b0);
}

SRegressionState s_regression(const DataMatrix& x, std::span<const double> y, RngStream& rng,
                              std::size_t n_subsets) {
  const std::size_t n = x.rows(), p = x.cols(), q = p + 1;
  if (y.size() != n) throw ShapeError("s_regression: y length mismatch");
  if (n <= 2 * q) throw DegenerateSampleError("s_regression: need n > 2(p+1)");
  if (n_subsets == 0) throw ParameterError("s_regression: n_subsets must be positive");

  const double c0 = stats::biweight_tuning_50(1);
  const double b0 = stats::biweight_rho_max(c0) / 2.0;
  constexpr int kImprovementSteps = 2;
  constexpr std::size_t kRefineCount = 5;

  std::vector<Candidate> candidates;
  candidates.reserve(n_subsets);
  std::vector<std::size_t> rows(q);
  std::vector<std::size_t> pool(n);
  std::vector<double> coef, r, w;
  std::size_t singular = 0;

  for (std::size_t s = 0; s < n_subsets; ++s) {
    // q distinct rows by partial Fisher-Yates.
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < q; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      rows[i] = pool[i];
    }
    if (!elemental_fit(x, y, rows, coef)) {
      ++singular;
      continue;
    }
    compute_residuals(x, y, coef, r);

    Candidate cand;
    double med_abs = 0.0;
    {
      std::vector<double> ar(n);
      for (std::size_t i = 0; i < n; ++i) ar[i] = std::abs(r[i]);
      med_abs = median(ar);
    }
    if (med_abs == 0.0) {
      // Exact fit of at least half the sample: scale is pinned at zero.
      cand.coef = coef;
      cand.sigma = residual_mscale(r, c0);
      cand.exact_fit = cand.sigma == 0.0;
      cand.converged = true;
      candidates.push_back(std::move(cand));
      if (candidates.back().exact_fit) break;
      continue;
    }
    double sigma = med_abs / 0.6745;
    for (int step = 0; step < kImprovementSteps; ++step) {
      sigma = scale_step(r, sigma, c0, b0);
      w.resize(n);
      for (std::size_t i = 0; i < n; ++i) w[i] = stats::biweight_weight(r[i] / sigma, c0);
      if (!weighted_ls(x, y, w, coef)) break;
      compute_residuals(x, y, coef, r);
    }
    // Tighten the scale a little more so the ranking is meaningful.
    for (int k = 0; k < 3; ++k) sigma = scale_step(r, sigma, c0, b0);
    cand.coef = coef;
    cand.sigma = sigma;
    candidates.push_back(std::move(cand));
  }
  if (candidates.empty())
    throw DegenerateDataError("s_regression: all elemental subsets were singular (" +
                              std::to_string(singular) + " drawn)");

  // Fully refine the most promising candidates.
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].sigma < candidates[b].sigma;
  });

  Candidate best;
  bool have_best = false;
  const std::size_t refine = std::min(kRefineCount, order.size());
  for (std::size_t k = 0; k < refine; ++k) {
    Candidate cand = candidates[order[k]];
    compute_residuals(x, y, cand.coef, r);
    if (!cand.exact_fit) {
      double sigma = cand.sigma;
      bool converged = false;
      for (int it = 0; it < 200; ++it) {
        sigma = scale_step(r, sigma, c0, b0);
        w.resize(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = stats::biweight_weight(r[i] / sigma, c0);
        std::vector<double> coef_new;
        if (!weighted_ls(x, y, w, coef_new)) break;
        double delta = 0.0, scale_ref = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
          delta = std::max(delta, std::abs(coef_new[j] - cand.coef[j]));
          scale_ref = std::max(scale_ref, std::abs(coef_new[j]));
        }
        cand.coef = std::move(coef_new);
        compute_residuals(x, y, cand.coef, r);
        if (delta <= 1e-9 * (1.0 + scale_ref)) {
          converged = true;
          break;
        }
      }
      cand.sigma = residual_mscale(r, c0);  // exact objective for the final ranking
      cand.converged = converged;
    }
    if (!have_best || cand.sigma < best.sigma) {
      best = std::move(cand);
      have_best = true;
    }
  }

  SRegressionState state;
  state.coefficients = best.coef;
  state.scale = best.sigma;
  state.objective = best.sigma;
  state.converged = best.converged;
  return state;
}

RegressionFit mm_step(const DataMatrix& x, std::span<const double> y,
                      const SRegressionState& initial, double efficiency,
                      std::vector<double>* objective_trace) {
  const std::size_t n = x.rows(), p = x.cols(), q = p + 1;
  if (y.size() != n) throw ShapeError("mm_step: y length mismatch");
  if (initial.coefficients.size() != q) throw ShapeError("mm_step: coefficient size mismatch");
  if (!(initial.scale > 0.0)) throw ParameterError("mm_step: initial scale must be positive");

  const double c = stats::biweight_tuning_efficiency(efficiency);
  const double sigma = initial.scale;

  std::vector<double> coef = initial.coefficients;
  std::vector<double> r, w(n);
  compute_residuals(x, y, coef, r);
  bool converged = false;
  auto objective = [&]() {
    double acc = 0.0;
    for (double v : r) acc += stats::biweight_rho(v / sigma, c);
    return acc / static_cast<double>(n);
  };
  for (int it = 0; it < 500; ++it) {
    for (std::size_t i = 0; i < n; ++i) w[i] = stats::biweight_weight(r[i] / sigma, c);
    std::vector<double> coef_new;
    if (!weighted_ls(x, y, w, coef_new))
      throw SingularSystemError("mm_step: weighted design lost rank");
    double delta = 0.0, scale_ref = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      delta = std::max(delta, std::abs(coef_new[j] - coef[j]));
      scale_ref = std::max(scale_ref, std::abs(coef_new[j]));
    }
    coef = std::move(coef_new);
    compute_residuals(x, y, coef, r);
    if (objective_trace) objective_trace->push_back(objective());
    if (delta <= 1e-10 * (1.0 + scale_ref)) {
      converged = true;
      break;
    }
  }

  RegressionFit fit;
  fit.method = converged ? "mm" : "mm(non-converged)";
  fit.intercept = coef[0];
  fit.slopes.assign(coef.begin() + 1, coef.end());
  fit.stderr_slopes.assign(p, std::numeric_limits<double>::quiet_NaN());
  fit.residuals = r;
  double rss = 0.0, tss = 0.0, ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    rss += r[i] * r[i];
    tss += (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r_squared = tss > 0.0 ? std::max(0.0, 1.0 - rss / tss) : 1.0;
  return fit;
}

}  // namespace eiv
