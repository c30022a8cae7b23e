#include "eiv/matrix.hpp"

#include <cmath>
#include <utility>

namespace eiv {

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {
  if (rows == 0 || cols == 0) throw ShapeError("DataMatrix: rows and cols must be >= 1");
}

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows == 0 || cols == 0) throw ShapeError("DataMatrix: rows and cols must be >= 1");
  if (values_.size() != rows * cols)
    throw ShapeError("DataMatrix: value count does not match rows*cols");
  for (double v : values_)
    if (!std::isfinite(v)) throw ShapeError("DataMatrix: non-finite value");
}

std::vector<double> DataMatrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = values_[i * cols_ + j];
  return out;
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> indices) const {
  DataMatrix out(indices.size(), cols_);
  for (std::size_t k = 0; k < indices.size(); ++k)
    for (std::size_t j = 0; j < cols_; ++j) out(k, j) = (*this)(indices[k], j);
  return out;
}

SymmetricMatrix::SymmetricMatrix(std::size_t dim) : dim_(dim), values_(dim * dim, 0.0) {}

double SymmetricMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += values_[i * dim_ + i];
  return t;
}

SymmetricMatrix SymmetricMatrix::scaled(double factor) const {
  SymmetricMatrix out(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j <= i; ++j) out.set(i, j, (*this)(i, j) * factor);
  return out;
}

}  // namespace eiv
