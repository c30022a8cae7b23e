#pragma once

#include <cstddef>
#include <span>

namespace eiv::stats {

double chisq_cdf(double x, double df);
double chisq_quantile(double p, double df);
double normal_cdf(double x);
double normal_quantile(double p);

// Tukey biweight family. rho is the integrated loss, capped at c^2/6;
// psi = rho'; weight = psi(u)/u extended continuously through 0.
double biweight_rho(double u, double c);
double biweight_psi(double u, double c);
double biweight_weight(double u, double c);
inline double biweight_rho_max(double c) { return c * c / 6.0; }

/// Tuning constant for 50% breakdown in dimension p: the c solving
/// E[rho_c(d)] = rho_c(c)/2 with d the norm of a standard p-variate Gaussian.
/// p = 1 is the regression-residual case (c ~ 1.5476).
double biweight_tuning_50(std::size_t p);

/// Tuning constant giving the requested Gaussian efficiency for the
/// location/regression M-estimator (e.g. 0.95 -> c ~ 4.685).
double biweight_tuning_efficiency(double efficiency);

/// Gaussian asymptotic efficiency of the biweight M-estimator at constant c.
double biweight_gaussian_efficiency(double c);

/// M-scale: the sigma solving mean(rho(v_i / sigma)) = b0, by monotone
/// bisection to 1e-10 relative. Returns 0 when the equation pins sigma at 0
/// (all values zero, or too large a fraction of exact zeros).
double mscale(std::span<const double> v, double c, double b0);

}  // namespace eiv::stats
