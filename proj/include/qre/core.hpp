// core.hpp — shared aliases, tolerances and error types.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace qre {

using Complex    = std::complex<double>;
using Matrix     = Eigen::MatrixXcd;
using Vector     = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index      = Eigen::Index;

// All public results are in bits; natural logs are converted once.
inline constexpr double kLn2 = 0.6931471805599453094172321214581766;

inline double to_bits(double nats) { return nats / kLn2; }

// Numerical cutoffs. States are validated against these at construction;
// eigenvalues in [-psd, 0) are clipped to zero with renormalisation.
struct Tolerances {
  static constexpr double hermiticity = 1e-10;
  static constexpr double psd         = 1e-9;
  static constexpr double trace       = 1e-9;
  // Relative support cutoff: eigenvalues <= support_rel * lambda_max count
  // as kernel when taking logs or inverses.
  static constexpr double support_rel = 1e-12;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Invalid input (shape mismatch, non-Hermitian matrix, bad flags, ...).
// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A solver failed to converge. Carries the best value found so far so that
// callers can still emit a partial report. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double best_value)
      : std::runtime_error(what), best_value_(best_value) {}
  double best_value() const { return best_value_; }

 private:
  double best_value_;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace detail

}  // namespace qre
