#include "eiv/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace eiv {

std::vector<double> column_means(const DataMatrix& m) {
  const std::size_t n = m.rows(), p = m.cols();
  std::vector<double> mean(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < p; ++j) mean[j] += r[j];
  }
  for (double& v : mean) v /= static_cast<double>(n);
  return mean;
}

SymmetricMatrix sample_covariance(const DataMatrix& m) {
  if (m.rows() < 2) throw DegenerateSampleError("sample_covariance: need at least 2 rows");
  const std::size_t n = m.rows(), p = m.cols();
  const std::vector<double> mean = column_means(m);
  SymmetricMatrix cov(p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = j; k < p; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += (m(i, j) - mean[j]) * (m(i, k) - mean[k]);
      cov.set(j, k, acc / static_cast<double>(n - 1));
    }
  }
  return cov;
}

std::vector<double> subset_mean(const DataMatrix& m, std::span<const std::size_t> indices) {
  if (indices.empty()) throw DegenerateSampleError("subset_mean: empty subset");
  const std::size_t p = m.cols();
  std::vector<double> mean(p, 0.0);
  for (std::size_t i : indices) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < p; ++j) mean[j] += r[j];
  }
  for (double& v : mean) v /= static_cast<double>(indices.size());
  return mean;
}

SymmetricMatrix subset_covariance(const DataMatrix& m, std::span<const std::size_t> indices) {
  if (indices.size() < 2) throw DegenerateSampleError("subset_covariance: need at least 2 rows");
  const std::size_t p = m.cols();
  const std::vector<double> mean = subset_mean(m, indices);
  SymmetricMatrix cov(p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = j; k < p; ++k) {
      double acc = 0.0;
      for (std::size_t i : indices) acc += (m(i, j) - mean[j]) * (m(i, k) - mean[k]);
      cov.set(j, k, acc / static_cast<double>(indices.size() - 1));
    }
  }
  return cov;
}

EighResult eigh(const SymmetricMatrix& s) {
  const std::size_t p = s.dim();
  std::vector<double> a(s.values());
  std::vector<double> v(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) v[i * p + i] = 1.0;

  double frob = 0.0;
  for (double x : a) frob += x * x;
  frob = std::sqrt(frob);
  const double target = 1e-12 * frob;

  auto off_norm = [&]() {
    double acc = 0.0;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) acc += 2.0 * a[i * p + j] * a[i * p + j];
    return std::sqrt(acc);
  };

  const int max_sweeps = 100;
  int sweep = 0;
  while (p > 1 && off_norm() > target) {
    if (++sweep > max_sweeps)
      throw NumericalFailureError("eigh: Jacobi sweeps did not converge");
    for (std::size_t iq = 0; iq < p; ++iq) {
      for (std::size_t jq = iq + 1; jq < p; ++jq) {
        const double apq = a[iq * p + jq];
        if (apq == 0.0) continue;
        const double app = a[iq * p + iq];
        const double aqq = a[jq * p + jq];
        const double theta = (aqq - app) / (2.0 * apq);
        // Stable rotation: t = sign(theta) / (|theta| + sqrt(theta^2 + 1)).
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < p; ++k) {
          const double akp = a[k * p + iq];
          const double akq = a[k * p + jq];
          a[k * p + iq] = c * akp - sn * akq;
          a[k * p + jq] = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const double apk = a[iq * p + k];
          const double aqk = a[jq * p + k];
          a[iq * p + k] = c * apk - sn * aqk;
          a[jq * p + k] = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const double vkp = v[k * p + iq];
          const double vkq = v[k * p + jq];
          v[k * p + iq] = c * vkp - sn * vkq;
          v[k * p + jq] = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(p);
  for (std::size_t i = 0; i < p; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a[x * p + x] < a[y * p + y]; });

  EighResult out;
  out.eigenvalues.resize(p);
  out.eigenvectors = DataMatrix(p, p);
  for (std::size_t k = 0; k < p; ++k) {
    out.eigenvalues[k] = a[order[k] * p + order[k]];
    for (std::size_t i = 0; i < p; ++i) out.eigenvectors(i, k) = v[i * p + order[k]];
  }
  return out;
}

Cholesky::Cholesky(const SymmetricMatrix& a) : n_(a.dim()), l_(n_ * n_, 0.0) {
  if (n_ > 64) throw ShapeError("cholesky: dimensions beyond 64 unsupported");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = a(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l_[i * n_ + k] * l_[j * n_ + k];
      if (i == j) {
        if (!(acc > 0.0) || !std::isfinite(acc))
          throw SingularSystemError("cholesky: non-positive pivot at index " + std::to_string(i));
        l_[i * n_ + i] = std::sqrt(acc);
      } else {
        l_[i * n_ + j] = acc / l_[j * n_ + j];
      }
    }
  }
}

double Cholesky::determinant() const {
  double det = 1.0;
  for (std::size_t i = 0; i < n_; ++i) det *= l_[i * n_ + i] * l_[i * n_ + i];
  return det;
}

double Cholesky::log_determinant() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i) acc += 2.0 * std::log(l_[i * n_ + i]);
  return acc;
}

std::vector<double> Cholesky::solve(std::span<const double> b) const {
  if (b.size() != n_) throw ShapeError("cholesky solve: dimension mismatch");
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = 0; k < i; ++k) x[i] -= l_[i * n_ + k] * x[k];
    x[i] /= l_[i * n_ + i];
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n_; ++k) x[ii] -= l_[k * n_ + ii] * x[k];
    x[ii] /= l_[ii * n_ + ii];
  }
  return x;
}

std::vector<double> Cholesky::forward(std::span<const double> b) const {
  if (b.size() != n_) throw ShapeError("cholesky forward: dimension mismatch");
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= l_[i * n_ + k] * y[k];
    y[i] /= l_[i * n_ + i];
  }
  return y;
}

std::vector<double> Cholesky::lower_times(std::span<const double> v) const {
  if (v.size() != n_) throw ShapeError("cholesky lower_times: dimension mismatch");
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k <= i; ++k) out[i] += l_[i * n_ + k] * v[k];
  return out;
}

double Cholesky::mahalanobis_sq(std::span<const double> x, std::span<const double> mu) const {
  if (x.size() != n_ || mu.size() != n_)
    throw ShapeError("mahalanobis: dimension mismatch");
  // Forward substitution of (x - mu); squared norm of the result.
  double acc = 0.0;
  double work[64];
  for (std::size_t i = 0; i < n_; ++i) {
    double t = x[i] - mu[i];
    for (std::size_t k = 0; k < i; ++k) t -= l_[i * n_ + k] * work[k];
    t /= l_[i * n_ + i];
    work[i] = t;
    acc += t * t;
  }
  return acc;
}

SymmetricMatrix Cholesky::inverse() const {
  SymmetricMatrix inv(n_);
  std::vector<double> e(n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    e[j] = 1.0;
    const std::vector<double> col = solve(e);
    e[j] = 0.0;
    for (std::size_t i = j; i < n_; ++i) inv.set(i, j, col[i]);
  }
  return inv;
}

std::vector<double> solve_spd(const SymmetricMatrix& a, std::span<const double> b) {
  return Cholesky(a).solve(b);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DegenerateSampleError("quantile: empty vector");
  if (q < 0.0 || q > 1.0) throw ParameterError("quantile: q outside [0,1]");
  const std::size_t n = sorted.size();
  const double h = static_cast<double>(n - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::span<const double> v, double q) {
  std::vector<double> work(v.begin(), v.end());
  std::sort(work.begin(), work.end());
  return quantile_sorted(work, q);
}

double median(std::span<const double> v) { return quantile(v, 0.5); }

double median_abs_dev(std::span<const double> v) {
  const double med = median(v);
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - med);
  return 1.4826 * median(dev);
}

double mahalanobis_sq(std::span<const double> x, std::span<const double> mu,
                      const SymmetricMatrix& s_inv) {
  const std::size_t p = s_inv.dim();
  if (x.size() != p || mu.size() != p) throw ShapeError("mahalanobis_sq: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double di = x[i] - mu[i];
    acc += di * di * s_inv(i, i);
    for (std::size_t j = i + 1; j < p; ++j) acc += 2.0 * di * (x[j] - mu[j]) * s_inv(i, j);
  }
  return acc;
}

SymmetricMatrix spd_floor(const SymmetricMatrix& s, double rel_floor, bool* floored) {
  const std::size_t p = s.dim();
  EighResult eg = eigh(s);
  const double tr = s.trace();
  const double floor_value = rel_floor * (tr > 0.0 ? tr : 1.0);
  bool any = false;
  for (double& lam : eg.eigenvalues) {
    if (lam < floor_value) {
      lam = floor_value;
      any = true;
    }
  }
  if (floored) *floored = any;
  if (!any) return s;
  SymmetricMatrix out(p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < p; ++k)
        acc += eg.eigenvectors(i, k) * eg.eigenvalues[k] * eg.eigenvectors(j, k);
      out.set(i, j, acc);
    }
  }
  return out;
}

}  // namespace eiv
