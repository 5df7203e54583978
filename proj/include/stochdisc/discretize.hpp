#pragma once

// Exact discretization of dx = A x dt + d(beta), E[d(beta) d(beta)^T] = S dt:
//
//   F_T = e^{A T},   Q_T = int_0^T e^{A tau} S e^{A^T tau} d tau.
//
// Methods:
//   lyap_p    Q = P - F P F^T with A P + P A^T = -S (strictly stable A)
//   lyap_q    A Q + Q A^T = -(S - F S F^T) (no lambda_i + lambda_j = 0)
//   proposed  Schur-reorder integrators last, closed-form nilpotent block,
//             Sylvester/Lyapunov for the coupled blocks
//   van_loan  one exponential of [[A, S], [0, -A^T]]
//   naive_a   (1/T) G S G^T, G = int_0^T e^{A tau} d tau (piecewise-constant noise)
//   naive_b   T S
//   oracle    Romberg quadrature of the integral, always in double

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stochdisc/linalg.hpp"

namespace stochdisc {

using linalg::Matrix;
using linalg::Index;

enum class Method { lyap_p, lyap_q, proposed, van_loan, naive_a, naive_b, oracle };

std::string_view method_name(Method method);
std::optional<Method> parse_method(std::string_view name);
const std::vector<Method>& all_methods();

/// True for the methods that compute the integral exactly (up to rounding).
bool is_exact(Method method);

/// Drift A and diffusion intensity S. S is symmetrized on construction and
/// must be positive semidefinite within 100 n eps ||S||_F.
template <typename Real>
class ContinuousModel {
 public:
  ContinuousModel(Matrix<Real> a, Matrix<Real> s);

  const Matrix<Real>& a() const { return a_; }
  const Matrix<Real>& s() const { return s_; }
  Index dim() const { return a_.rows(); }

  template <typename Other>
  ContinuousModel<Other> cast() const {
    return ContinuousModel<Other>(a_.template cast<Other>(), s_.template cast<Other>());
  }

 private:
  Matrix<Real> a_;
  Matrix<Real> s_;
};

template <typename Real>
struct DiscreteModel {
  Matrix<Real> f;
  Matrix<Real> q;
  Real horizon = 0;
};

/// Diagnostic values keyed by name. A NaN value means "n/a".
using Diagnostics = std::map<std::string, double>;

template <typename Real>
struct MethodReport {
  DiscreteModel<Real> model;
  Method method;
  Diagnostics diagnostics;
};

template <typename Real>
MethodReport<Real> discretize_lyap_p(const ContinuousModel<Real>& m, Real t);

template <typename Real>
MethodReport<Real> discretize_lyap_q(const ContinuousModel<Real>& m, Real t);

/// Options for the integrator-aware method.
template <typename Real>
struct ProposedOptions {
  std::optional<Real> tau_zero;  // zero-eigenvalue threshold override
};

template <typename Real>
MethodReport<Real> discretize_proposed(const ContinuousModel<Real>& m, Real t,
                                       const ProposedOptions<Real>& options = {});

template <typename Real>
MethodReport<Real> discretize_vanloan(const ContinuousModel<Real>& m, Real t);

/// Closed-form int_0^T e^{N tau} S e^{N^T tau} d tau for nilpotent N:
///   sum_{i,j < p} T^{i+j+1} / (i! j! (i+j+1)) N^i S (N^j)^T.
/// `tau` is the absolute threshold used for the nilpotency check
/// ||N^p||_F <= p tau (||N||_F + tau)^{p-1}; by default it is
/// default_tau_zero(p, ||N||_F, p).
template <typename Real>
Matrix<Real> q_nilpotent(const Matrix<Real>& a22, const Matrix<Real>& s22, Real t,
                         std::optional<Real> tau = std::nullopt);

template <typename Real>
Matrix<Real> naive_q_a(const ContinuousModel<Real>& m, Real t);

template <typename Real>
Matrix<Real> naive_q_b(const ContinuousModel<Real>& m, Real t);

struct OracleOptions {
  double rel_tol = 1e-12;
  int max_depth = 24;  // interval doublings
  int min_depth = 4;
};

/// Composite trapezoid with interval doubling and Romberg extrapolation; stops
/// when successive extrapolated estimates differ by <= rel_tol (Frobenius,
/// relative). Always evaluated in double.
Matrix<double> q_oracle(const ContinuousModel<double>& m, double t,
                        const OracleOptions& options = {});

/// (u_inv A u, u_inv S u_inv^T).
template <typename Real>
ContinuousModel<Real> transform_model(const ContinuousModel<Real>& m, const Matrix<Real>& u,
                                      const Matrix<Real>& u_inv);

/// (u F u_inv, u Q u^T).
template <typename Real>
DiscreteModel<Real> transform_result(const DiscreteModel<Real>& d, const Matrix<Real>& u,
                                     const Matrix<Real>& u_inv);

/// Runs `method` on (m, t). The degenerate horizon t == 0 returns F = I,
/// Q = 0 for every method without invoking a solver.
template <typename Real>
MethodReport<Real> discretize(const ContinuousModel<Real>& m, Method method, Real t,
                              const OracleOptions& oracle = {});

/// ||Q_{t1+t2} - (F_{t2} Q_{t1} F_{t2}^T + Q_{t2})||_2 / max(||Q_{t1+t2}||_2, floor),
/// floor = eps ||S||_2.
template <typename Real>
Real semigroup_residual(const ContinuousModel<Real>& m, Method method, Real t1, Real t2,
                        const OracleOptions& oracle = {});

/// ||A Q + Q A^T + S - F S F^T||_2 normalized by
/// max(2 ||A||_2 ||Q||_2 + (1 + ||F||_2^2) ||S||_2, floor). Valid for any A.
template <typename Real>
Real lemma2_residual(const ContinuousModel<Real>& m, const Matrix<Real>& f,
                     const Matrix<Real>& q);

/// Relative spectral-norm distance ||x - y||_2 / ||y||_2 (absolute if y == 0).
template <typename Real>
Real relative_error(const Matrix<Real>& x, const Matrix<Real>& y);

}  // namespace stochdisc
