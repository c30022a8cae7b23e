#include "eiv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "eiv/errors.hpp"

namespace eiv::stats {

double chisq_cdf(double x, double df) {
  if (x <= 0.0) return 0.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(dist, x);
}

double chisq_quantile(double p, double df) {
  if (p < 0.0 || p >= 1.0) throw ParameterError("chisq_quantile: p outside [0,1)");
  if (p == 0.0) return 0.0;
  boost::math::chi_squared dist(df);
  return boost::math::quantile(dist, p);
}

double normal_cdf(double x) {
  static const boost::math::normal dist;
  return boost::math::cdf(dist, x);
}

double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) throw ParameterError("normal_quantile: p outside (0,1)");
  static const boost::math::normal dist;
  return boost::math::quantile(dist, p);
}

double biweight_rho(double u, double c) {
  const double a = std::abs(u);
  if (a >= c) return c * c / 6.0;
  const double r = u / c;
  const double one = 1.0 - r * r;
  return (c * c / 6.0) * (1.0 - one * one * one);
}

double biweight_psi(double u, double c) {
  if (std::abs(u) >= c) return 0.0;
  const double r = u / c;
  const double one = 1.0 - r * r;
  return u * one * one;
}

double biweight_weight(double u, double c) {
  if (std::abs(u) >= c) return 0.0;
  const double r = u / c;
  const double one = 1.0 - r * r;
  return one * one;
}

namespace {

// E[rho_c(d)] for d = ||Z||, Z standard p-variate Gaussian, via the identity
// E[X^k 1(X<=t)] = p(p+2)...(p+2k-2) F_{p+2k}(t) for X ~ chisq(p).
double expected_rho_gaussian(double c, std::size_t p) {
  const double t = c * c;
  const double dp = static_cast<double>(p);
  const double m1 = dp;
  const double m2 = dp * (dp + 2.0);
  const double m3 = dp * (dp + 2.0) * (dp + 4.0);
  const double f2 = chisq_cdf(t, dp + 2.0);
  const double f4 = chisq_cdf(t, dp + 4.0);
  const double f6 = chisq_cdf(t, dp + 6.0);
  const double f0 = chisq_cdf(t, dp);
  return 0.5 * m1 * f2 - m2 * f4 / (2.0 * t) + m3 * f6 / (6.0 * t * t) +
         (t / 6.0) * (1.0 - f0);
}

double gauss_density(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// Simpson quadrature of f over [a, b]; n panels (even).
template <typename F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

double biweight_gaussian_efficiency(double c) {
  // eff = (E[psi'(Z)])^2 / E[psi(Z)^2] under Z ~ N(0,1).
  auto dpsi = [c](double u) {
    if (std::abs(u) >= c) return 0.0;
    const double r2 = (u / c) * (u / c);
    return (1.0 - r2) * (1.0 - 5.0 * r2);
  };
  const double num = simpson([&](double u) { return dpsi(u) * gauss_density(u); }, -c, c, 4000);
  const double den = simpson(
      [&](double u) {
        const double ps = biweight_psi(u, c);
        return ps * ps * gauss_density(u);
      },
      -c, c, 4000);
  return num * num / den;
}

double biweight_tuning_50(std::size_t p) {
  if (p == 0 || p > 16) throw ParameterError("biweight_tuning_50: dimension out of range");
  static const std::vector<double> cache = [] {
    std::vector<double> table(17, 0.0);
    for (std::size_t dim = 1; dim <= 16; ++dim) {
      double lo = 0.5, hi = 40.0;
      // g(c) = E[rho_c] - rho_c(c)/2 crosses from positive to negative once;
      // bisect to machine-level accuracy.
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double g = expected_rho_gaussian(mid, dim) - mid * mid / 12.0;
        (g > 0.0 ? lo : hi) = mid;
      }
      table[dim] = 0.5 * (lo + hi);
    }
    return table;
  }();
  return cache[p];
}

double biweight_tuning_efficiency(double efficiency) {
  if (efficiency <= 0.0 || efficiency >= 1.0)
    throw ParameterError("biweight_tuning_efficiency: efficiency outside (0,1)");
  static std::mutex mu;
  static std::map<double, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(efficiency);
    if (it != cache.end()) return it->second;
  }
  double lo = 0.6, hi = 40.0;  // efficiency is increasing in c
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (biweight_gaussian_efficiency(mid) < efficiency ? lo : hi) = mid;
  }
  const double c = 0.5 * (lo + hi);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(efficiency, c);
  return c;
}

double mscale(std::span<const double> v, double c, double b0) {
  if (v.empty()) throw DegenerateSampleError("mscale: empty vector");
  const double n = static_cast<double>(v.size());
  std::size_t nonzero = 0;
  double max_abs = 0.0;
  for (double x : v) {
    const double a = std::abs(x);
    if (a > 0.0) ++nonzero;
    max_abs = std::max(max_abs, a);
  }
  if (nonzero == 0) return 0.0;
  // As sigma -> 0 the mean loss tends to (nonzero/n) * rho_max; if that cannot
  // reach b0 the root is pinned at zero (exact fit of the majority).
  const double rho_max = biweight_rho_max(c);
  if (static_cast<double>(nonzero) / n * rho_max <= b0) return 0.0;

  auto mean_rho = [&](double sigma) {
    double acc = 0.0;
    for (double x : v) acc += biweight_rho(x / sigma, c);
    return acc / n;
  };

  double hi = max_abs / c;  // all |x|/sigma <= c: mean rho below b0 for sure
  double lo = hi;
  while (mean_rho(hi) > b0) hi *= 2.0;
  while (mean_rho(lo) < b0) {
    lo *= 0.5;
    if (lo < 1e-300) return 0.0;
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_rho(mid) > b0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace eiv::stats
