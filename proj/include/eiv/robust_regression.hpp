#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eiv/classical.hpp"
#include "eiv/matrix.hpp"
#include "eiv/rng.hpp"

namespace eiv {

/// Converged S-regression state: the very robust "raw" fit that an MM chain
/// starts from. objective equals scale at a fixed point.
struct SRegressionState {
  std::vector<double> coefficients;  // intercept first
  double scale = 0.0;
  double objective = 0.0;
  bool converged = false;
};

/// M-scale of a residual vector under the Tukey biweight at 50% breakdown:
/// the sigma solving mean(rho(r_i/sigma)) = rho(c)/2.
double residual_mscale(std::span<const double> residuals, double c);

/// Fast-S search: random (p+1)-point elemental fits, two local improvement
/// steps each, full refinement of the best five, smallest M-scale wins.
SRegressionState s_regression(const DataMatrix& x, std::span<const double> y, RngStream& rng,
                              std::size_t n_subsets = 500);

/// Efficiency-seeking M-step: iteratively reweighted least squares with the
/// biweight psi tuned to the requested Gaussian efficiency, holding the scale
/// fixed at initial.scale. Non-convergence after 500 iterations returns the
/// last iterate with converged unset. objective_trace, when given, records
/// the fixed-scale M-objective after every iteration.
RegressionFit mm_step(const DataMatrix& x, std::span<const double> y,
                      const SRegressionState& initial, double efficiency = 0.85,
                      std::vector<double>* objective_trace = nullptr);

}  // namespace eiv
