#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "eiv/matrix.hpp"

namespace eiv {

struct RegressionFit {
  double intercept = 0.0;
  std::vector<double> slopes;
  double stderr_intercept = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> stderr_slopes;  // NaN entries mean not available
  std::string method;
  std::vector<double> residuals;  // empty for fits derived from a scatter matrix
  double r_squared = std::numeric_limits<double>::quiet_NaN();

  double slope() const { return slopes.at(0); }
};

/// Ordinary least squares with an intercept; Gauss-Markov standard errors
/// from sigma^2 (X'X)^{-1} with sigma^2 = RSS/(n-p-1).
RegressionFit ols_fit(const DataMatrix& x, std::span<const double> y);

/// HC3 standard errors for the OLS fit: sqrt of the diagonal of
/// (X'X)^{-1} X' diag(e_i^2/(1-h_ii)^2) X (X'X)^{-1}, intercept entry first.
std::vector<double> hc3_stderr(const DataMatrix& x, std::span<const double> y,
                               const RegressionFit& fit);

/// Orthogonal regression for the bivariate case: slope from the eigenvector
/// of the smallest eigenvalue of the 2x2 covariance of (x, y).
RegressionFit orthogonal_fit(std::span<const double> x, std::span<const double> y);

/// Geometric-mean regression: slope = sign(corr) * sd(y)/sd(x).
RegressionFit geom_fit(std::span<const double> x, std::span<const double> y);

/// Instrumental slope cov(g,y)/cov(g,w) for an arbitrary instrument column.
RegressionFit instrumental_fit(std::span<const double> w, std::span<const double> y,
                               std::span<const double> instrument, const std::string& method);

/// Higher-moment instrument: the squared regressor. Consistent when the
/// regressor is skewed and mismeasurement is classical; the residual linear
/// leak is what the Table 7 comparison exercises.
RegressionFit moment_iv_fit(std::span<const double> w, std::span<const double> y);

/// Rank instrument (average ranks on ties).
RegressionFit rank_iv_fit(std::span<const double> w, std::span<const double> y);

/// Probability limit of the OLS slope when beta = 1, the regressor has
/// variance var_x, and a fraction frac of observations carry additive
/// N(mu_u, sd_u) error: var_x / (var_x + frac*(sd_u^2 + mu_u^2) - frac^2*mu_u^2).
double attenuation_limit(double var_x, double frac, double mu_u, double sd_u);

/// Average ranks (1-based, ties share their mean rank).
std::vector<double> average_ranks(std::span<const double> v);

}  // namespace eiv
