#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eiv/errors.hpp"

namespace eiv {

/// Dense row-major observation matrix: n rows of p coordinates.
/// The value-taking constructor validates shape and finiteness; element
/// writes through operator() are unchecked (hot paths keep the invariant
/// because every generator and ingest routine produces finite values).
class DataMatrix {
 public:
  DataMatrix() = default;
  DataMatrix(std::size_t rows, std::size_t cols);
  DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }

  std::vector<double> column(std::size_t j) const;
  DataMatrix select_rows(std::span<const std::size_t> indices) const;

  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Symmetric matrix stored as a full dense block; set() mirrors the entry so
/// values(i,j) == values(j,i) holds exactly at all times.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }

  double operator()(std::size_t i, std::size_t j) const { return values_[i * dim_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    values_[i * dim_ + j] = v;
    values_[j * dim_ + i] = v;
  }

  double trace() const;
  SymmetricMatrix scaled(double factor) const;

  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

}  // namespace eiv
