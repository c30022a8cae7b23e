#pragma once

#include <stdexcept>
#include <string>

namespace eiv {

// Error taxonomy. Kind::data covers malformed input (bad parameters, schema
// violations, samples too small to define the estimate); Kind::numeric covers
// failures that arise during computation (singular systems, non-convergence,
// rank collapse). The CLI maps data -> exit 2 and numeric -> exit 3.
class Error : public std::runtime_error {
 public:
  enum class Kind { data, numeric };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct ParameterError : Error {
  explicit ParameterError(const std::string& w) : Error(Kind::data, w) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error(Kind::data, w) {}
};

struct SchemaError : Error {
  explicit SchemaError(const std::string& w) : Error(Kind::data, w) {}
};

struct EmptyDataError : Error {
  explicit EmptyDataError(const std::string& w) : Error(Kind::data, w) {}
};

// Too few observations for the requested estimate.
struct DegenerateSampleError : Error {
  explicit DegenerateSampleError(const std::string& w) : Error(Kind::data, w) {}
};

struct SingularSystemError : Error {
  explicit SingularSystemError(const std::string& w) : Error(Kind::numeric, w) {}
};

// Iteration cap reached, or a stochastic procedure exceeded its failure budget.
struct NumericalFailureError : Error {
  explicit NumericalFailureError(const std::string& w) : Error(Kind::numeric, w) {}
};

// A concentration subset lost full rank.
struct RankCollapseError : Error {
  explicit RankCollapseError(const std::string& w) : Error(Kind::numeric, w) {}
};

// Data without enough structure for the estimator (zero MAD coordinate,
// all starts collapsed, vertical principal axis, zero correlation, ...).
struct DegenerateDataError : Error {
  explicit DegenerateDataError(const std::string& w) : Error(Kind::numeric, w) {}
};

struct WeakInstrumentError : Error {
  explicit WeakInstrumentError(const std::string& w) : Error(Kind::numeric, w) {}
};

}  // namespace eiv
