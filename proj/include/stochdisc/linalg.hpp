#pragma once

// Dense real kernels used by the discretization methods. Everything is
// templated on the scalar type and explicitly instantiated for float and
// double; a single call never mixes widths.

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace stochdisc::linalg {

template <typename Real>
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

template <typename Real>
constexpr Real machine_epsilon() {
  return std::numeric_limits<Real>::epsilon();
}

/// Throws ErrorKind::non_finite if any entry is NaN or Inf.
template <typename Real>
void require_finite(const Matrix<Real>& m, std::string_view what);

/// Throws ErrorKind::dimension unless m is square.
template <typename Real>
void require_square(const Matrix<Real>& m, std::string_view what);

template <typename Real>
Real frobenius_norm(const Matrix<Real>& m) {
  return m.size() == 0 ? Real(0) : m.norm();
}

/// Largest singular value.
template <typename Real>
Real spectral_norm(const Matrix<Real>& m);

/// e^{a t} by scaling and squaring with a diagonal Pade approximant. The
/// degree/scaling table depends on the width of Real. Throws
/// ErrorKind::overflow if the result is not finite.
template <typename Real>
Matrix<Real> mat_exp(const Matrix<Real>& a, Real t);

template <typename Real>
struct SchurPair {
  Matrix<Real> u;  // orthogonal
  Matrix<Real> t;  // quasi-upper-triangular, a = u t u^T
};

/// Real Schur decomposition (Hessenberg reduction + Francis double-shift QR).
/// Entries below the first subdiagonal of t are exactly zero, and every 2x2
/// diagonal block carries a complex-conjugate pair.
template <typename Real>
SchurPair<Real> real_schur(const Matrix<Real>& a, int max_iterations_per_row = 40);

/// A real Schur pair whose trailing (n - split) x (n - split) block holds
/// every eigenvalue classified as zero.
template <typename Real>
struct OrderedSchur {
  Matrix<Real> u;
  Matrix<Real> t;
  Index split = 0;
  Real tau_zero = 0;  // threshold actually used for the classification

  Index integrators() const { return t.rows() - split; }
};

/// Default zero-eigenvalue threshold for a cluster of `cluster_size`
/// eigenvalues of an n x n matrix with Frobenius norm `norm_a`:
///   norm_a * (100 n eps)^(1/cluster_size).
/// A defective zero eigenvalue of multiplicity k is perturbed to magnitude
/// ~ eps^(1/k) by rounding, so the threshold widens with the cluster size.
/// For cluster_size == 1 this is 100 n eps ||A||_F.
template <typename Real>
Real default_tau_zero(Index n, Real norm_a, Index cluster_size);

/// Reorders (u, t) so that every eigenvalue with |lambda| <= tau_zero sits in
/// the trailing block, using orthogonal swaps of adjacent diagonal blocks.
/// Without an explicit tau_zero the zero cluster is the largest set of
/// smallest-modulus eigenvalues that is both within default_tau_zero and
/// consistent with a rounded nilpotent block (every elementary symmetric
/// function e_j of the cluster is O(eps ||A||^j)).
template <typename Real>
OrderedSchur<Real> order_schur_zeros_last(const Matrix<Real>& u,
                                          const Matrix<Real>& t,
                                          std::optional<Real> tau_zero = std::nullopt);

/// True if m is upper quasi-triangular: zeros below the first subdiagonal and
/// no two consecutive non-zero subdiagonal entries.
template <typename Real>
bool is_quasi_upper_triangular(const Matrix<Real>& m);

/// Eigenvalues read off the 1x1/2x2 diagonal blocks of a quasi-triangular t.
template <typename Real>
std::vector<std::complex<Real>> quasi_triangular_eigenvalues(const Matrix<Real>& t);

/// Eigenvalues of a general square matrix (via real_schur).
template <typename Real>
std::vector<std::complex<Real>> eigenvalues(const Matrix<Real>& a);

/// Threshold below which min |lambda_i(a) + lambda_j(b)| is treated as zero:
/// 100 eps (||a||_F + ||b||_F).
template <typename Real>
Real singularity_threshold(Real norm_a, Real norm_b);

/// Solves a x + x b = c by Bartels-Stewart. Coefficient matrices that are
/// already upper (or lower) quasi-triangular are used as-is instead of being
/// Schur-factored again. Throws NearSingularError when some
/// lambda_i(a) + lambda_j(b) is below singularity_threshold.
template <typename Real>
Matrix<Real> solve_sylvester(const Matrix<Real>& a, const Matrix<Real>& b,
                             const Matrix<Real>& c);

/// Solves a x + x a^T = c for symmetric c; the result is symmetrized.
template <typename Real>
Matrix<Real> solve_lyapunov(const Matrix<Real>& a, const Matrix<Real>& c);

/// ||a x + x b - c||_F / ((||a||_F + ||b||_F) ||x||_F), or 0 when x == 0 and
/// the residual vanishes.
template <typename Real>
Real sylvester_residual(const Matrix<Real>& a, const Matrix<Real>& b,
                        const Matrix<Real>& c, const Matrix<Real>& x);

template <typename Real>
Matrix<Real> symmetrized(const Matrix<Real>& m) {
  return (m + m.transpose()) / Real(2);
}

/// Smallest eigenvalue of a symmetric matrix.
template <typename Real>
Real min_symmetric_eigenvalue(const Matrix<Real>& m);

}  // namespace stochdisc::linalg
