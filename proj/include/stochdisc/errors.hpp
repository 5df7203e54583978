#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stochdisc {

enum class ErrorKind {
  dimension,
  non_finite,
  overflow,
  convergence,
  near_singular,
  classification,
  not_applicable,
  unsupported_spectrum,
  precondition,
  parse,
};

std::string_view error_kind_name(ErrorKind kind);

// Every failure raised by the library derives from Error; kind() lets callers
// (the CLI exit-code mapping, the benchmark status column) branch without
// catching each subclass.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when lambda_i(a) + lambda_j(b) is numerically zero, i.e. the
// Sylvester/Lyapunov equation has no unique solution.
class NearSingularError : public Error {
 public:
  NearSingularError(std::complex<double> lambda_a, std::complex<double> lambda_b,
                    double threshold);

  std::complex<double> lambda_a() const noexcept { return lambda_a_; }
  std::complex<double> lambda_b() const noexcept { return lambda_b_; }
  double threshold() const noexcept { return threshold_; }

 private:
  std::complex<double> lambda_a_;
  std::complex<double> lambda_b_;
  double threshold_;
};

}  // namespace stochdisc
