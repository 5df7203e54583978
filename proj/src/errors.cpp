#include "stochdisc/errors.hpp"

#include <sstream>

namespace stochdisc {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::non_finite: return "non_finite";
    case ErrorKind::overflow: return "overflow";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::near_singular: return "near_singular";
    case ErrorKind::classification: return "classification";
    case ErrorKind::not_applicable: return "not_applicable";
    case ErrorKind::unsupported_spectrum: return "unsupported_spectrum";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::parse: return "parse";
  }
  return "unknown";
}

namespace {

std::string format_pair(std::complex<double> la, std::complex<double> lb,
                        double threshold) {
  std::ostringstream os;
  os.precision(6);
  os << "eigenvalue-sum singularity: lambda_i(a) = " << la.real() << (la.imag() < 0 ? "-" : "+")
     << std::abs(la.imag()) << "i, lambda_j(b) = " << lb.real() << (lb.imag() < 0 ? "-" : "+")
     << std::abs(lb.imag()) << "i, |lambda_i + lambda_j| = " << std::abs(la + lb)
     << " <= " << threshold << "; the Sylvester equation has no unique solution";
  return os.str();
}

}  // namespace

NearSingularError::NearSingularError(std::complex<double> lambda_a,
                                     std::complex<double> lambda_b, double threshold)
    : Error(ErrorKind::near_singular, format_pair(lambda_a, lambda_b, threshold)),
      lambda_a_(lambda_a),
      lambda_b_(lambda_b),
      threshold_(threshold) {}

}  // namespace stochdisc
