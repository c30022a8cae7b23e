#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eiv/matrix.hpp"

namespace eiv {

std::vector<double> column_means(const DataMatrix& m);

/// Unbiased sample covariance (divisor n-1). Needs at least two rows.
SymmetricMatrix sample_covariance(const DataMatrix& m);

/// Mean and covariance restricted to a row subset.
std::vector<double> subset_mean(const DataMatrix& m, std::span<const std::size_t> indices);
SymmetricMatrix subset_covariance(const DataMatrix& m, std::span<const std::size_t> indices);

struct EighResult {
  std::vector<double> eigenvalues;  // ascending
  DataMatrix eigenvectors;          // column k pairs with eigenvalues[k]
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Intended for the
/// small dimensions used here (p <= ~50); converges when the off-diagonal
/// Frobenius norm drops below 1e-12 * ||S||_F.
EighResult eigh(const SymmetricMatrix& s);

/// Solve a*x = b for symmetric positive definite a (Cholesky).
std::vector<double> solve_spd(const SymmetricMatrix& a, std::span<const double> b);

/// Linear-interpolation quantile, h = (n-1)q convention.
double quantile(std::span<const double> v, double q);
double quantile_sorted(std::span<const double> sorted, double q);
double median(std::span<const double> v);

/// 1.4826 * median(|v - median(v)|); Gaussian-consistent robust scale.
double median_abs_dev(std::span<const double> v);

/// Quadratic form (x-mu)' s_inv (x-mu) with a caller-supplied inverse.
double mahalanobis_sq(std::span<const double> x, std::span<const double> mu,
                      const SymmetricMatrix& s_inv);

/// Cholesky factor of an SPD matrix, kept around for repeated solves,
/// determinants, and Mahalanobis distances against the factored matrix.
class Cholesky {
 public:
  explicit Cholesky(const SymmetricMatrix& a);

  std::size_t dim() const noexcept { return n_; }
  double determinant() const;
  double log_determinant() const;
  std::vector<double> solve(std::span<const double> b) const;
  /// Forward substitution L y = b (whitening transform).
  std::vector<double> forward(std::span<const double> b) const;
  /// L * v.
  std::vector<double> lower_times(std::span<const double> v) const;
  /// (x-mu)' A^{-1} (x-mu) via one forward substitution.
  double mahalanobis_sq(std::span<const double> x, std::span<const double> mu) const;
  SymmetricMatrix inverse() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> l_;  // lower triangle of the factor, row-major full storage
};

/// Clamp eigenvalues from below at rel_floor * trace and reconstruct.
/// Sets *floored when any eigenvalue was raised.
SymmetricMatrix spd_floor(const SymmetricMatrix& s, double rel_floor, bool* floored);

}  // namespace eiv
