#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace lcb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Geometric tolerance used by membership verdicts and boundary location.
inline constexpr double kGeoTol = 1e-9;
// Slack applied to value comparisons before lexicographic tie-breaking.
inline constexpr double kTieSlack = 1e-12;

/// Precondition of an operation was violated by the caller.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A structural invariant of an input object does not hold
/// (unbounded constraint set, loss mean outside [0,1], ...).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Monte-Carlo machinery could not produce a sample.
class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal consistency check failed; indicates a numerical problem
/// in one of the oracles rather than bad input.
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value appeared in an intermediate quantity.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_finite(const Vector& v, const char* where) {
  if (!v.allFinite()) throw NumericalError(std::string("non-finite value in ") + where);
}

inline void require_finite(double v, const char* where) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite value in ") + where);
}

// Lexicographic comparison of two equally sized vectors; exact on coordinates.
inline bool lex_less(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace lcb
