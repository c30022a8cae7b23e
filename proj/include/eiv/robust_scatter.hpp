#pragma once

#include <cstddef>
#include <vector>

#include "eiv/classical.hpp"
#include "eiv/matrix.hpp"

namespace eiv {

/// Robust multivariate location/scatter estimate. For MCD-type estimates
/// `support` is the h-subset, `determinant` the determinant of the raw
/// (uncorrected) subset covariance, and `scatter` carries the Gaussian
/// consistency factor when `consistency_applied` is set, so
/// det(scatter) = determinant * consistency_factor^p. For S-type estimates
/// the tuning constant already makes the scatter Fisher-consistent
/// (factor 1) and `support` collects the rows with nonzero weight.
struct ScatterEstimate {
  std::vector<double> location;
  SymmetricMatrix scatter;
  std::vector<std::size_t> support;  // sorted row indices
  double determinant = 0.0;
  std::size_t h = 0;
  bool consistency_applied = false;
  double consistency_factor = 1.0;
  bool degenerate = false;  // an eigenvalue floor engaged while building this estimate

  SymmetricMatrix raw_scatter() const { return scatter.scaled(1.0 / consistency_factor); }
};

/// One concentration step: rank all rows by Mahalanobis distance under the
/// current estimate, keep the h closest, re-estimate mean/covariance. The
/// determinant never increases along a chain of such steps started from a
/// subset-based estimate.
ScatterEstimate c_step(const DataMatrix& m, const ScatterEstimate& current);

/// Deterministic MCD: C-step chains from six fixed starts, smallest
/// determinant wins (ties broken by start index). h = floor(alpha*n), raised
/// to the maximal-breakdown bound ceil((n+p+1)/2).
ScatterEstimate detmcd(const DataMatrix& m, double alpha = 0.5);

/// Same with an explicit subset size (h >= p+1); used by small-sample
/// enumeration checks where the breakdown bound would exceed the target h.
ScatterEstimate detmcd_h(const DataMatrix& m, std::size_t h);

/// Deterministic multivariate S-estimate: Tukey biweight at 50% breakdown,
/// iteratively reweighted from the same six starts, smallest M-scale wins.
ScatterEstimate dets(const DataMatrix& m);

/// The six deterministic initial estimates, computed on median/MAD
/// standardized coordinates and refined to an h-subset mean/covariance in the
/// original coordinates (ready to start a C-step chain). h == 0 selects the
/// default maximal-breakdown subset size.
std::vector<ScatterEstimate> six_starts(const DataMatrix& m, std::size_t h = 0);

/// Regression coefficients from a joint (regressors, response) scatter:
/// slopes solve C_xx b = c_xy, intercept from the locations. Standard errors
/// are left unavailable (the bootstrap supplies them).
RegressionFit scatter_to_regression(const ScatterEstimate& est, std::size_t dep);

/// Gaussian consistency factor c(h,n,p) = (h/n) / P(chisq_{p+2} <= q) with q
/// the chisq_p quantile at h/n; 1 when h == n.
double mcd_consistency_factor(std::size_t h, std::size_t n, std::size_t p);

/// Maximal-breakdown default subset size max(floor(alpha*n), ceil((n+p+1)/2)).
std::size_t mcd_default_h(std::size_t n, std::size_t p, double alpha);

}  // namespace eiv
