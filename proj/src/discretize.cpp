#include "stochdisc/discretize.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <type_traits>

#include "stochdisc/errors.hpp"

namespace stochdisc {

namespace {

constexpr double kNotAvailable = std::numeric_limits<double>::quiet_NaN();

template <typename Real>
void require_horizon(Real t, std::string_view what) {
  if (!std::isfinite(t) || t < Real(0)) {
    std::ostringstream os;
    os << what << ": sampling time must be finite and >= 0, got " << t;
    throw Error(ErrorKind::precondition, os.str());
  }
}

template <typename Real>
MethodReport<Real> degenerate_report(const ContinuousModel<Real>& m, Method method) {
  const Index n = m.dim();
  MethodReport<Real> r{{Matrix<Real>::Identity(n, n), Matrix<Real>::Zero(n, n), Real(0)},
                       method,
                       {}};
  r.diagnostics["sylvester_residual"] = kNotAvailable;
  r.diagnostics["lemma2_residual"] = 0.0;
  return r;
}

template <typename Real>
Real residual_floor(const ContinuousModel<Real>& m) {
  return std::max(linalg::machine_epsilon<Real>() * linalg::spectral_norm(m.s()),
                  std::numeric_limits<Real>::min());
}

[[noreturn]] void rethrow_as_not_applicable(const NearSingularError& e, std::string_view method) {
  throw Error(ErrorKind::not_applicable, std::string(method) + " not applicable: " + e.what());
}

template <typename Real>
MethodReport<Real> finish(const ContinuousModel<Real>& m, Method method, Matrix<Real> f,
                          Matrix<Real> q, Real t, Diagnostics diagnostics) {
  if (!f.allFinite() || !q.allFinite()) {
    throw Error(ErrorKind::overflow,
                std::string(method_name(method)) + ": result is not finite");
  }
  MethodReport<Real> r{{std::move(f), std::move(q), t}, method, std::move(diagnostics)};
  if (!r.diagnostics.count("sylvester_residual")) {
    r.diagnostics["sylvester_residual"] = kNotAvailable;
  }
  r.diagnostics["lemma2_residual"] =
      static_cast<double>(lemma2_residual(m, r.model.f, r.model.q));
  return r;
}


// Orthogonal staircase reduction of the trailing p x p block of `at` (rows and
// columns k..n-1) to strictly upper triangular form. The block is nilpotent up
// to rounding; at each level the smallest right singular vector of the
// remaining block is rotated to the front and the O(eps) column it leaves
// behind is dropped. Returns the Frobenius norm of everything dropped.
template <typename Real>
Real make_exactly_nilpotent(Matrix<Real>& at, Matrix<Real>& u, Index k) {
  const Index n = at.rows();
  Real dropped2 = 0;
  for (Index l = k; l < n; ++l) {
    const Index r = n - l;
    if (r > 1) {
      Eigen::JacobiSVD<Matrix<Real>> svd(at.bottomRightCorner(r, r), Eigen::ComputeFullV);
      const Matrix<Real> v = svd.matrixV().col(r - 1);
      Eigen::HouseholderQR<Matrix<Real>> qr(v);
      const Matrix<Real> w = qr.householderQ() * Matrix<Real>::Identity(r, r);
      at.rightCols(r) = (at.rightCols(r) * w).eval();
      at.bottomRows(r) = (w.transpose() * at.bottomRows(r)).eval();
      u.rightCols(r) = (u.rightCols(r) * w).eval();
    }
    dropped2 += at.col(l).tail(r).squaredNorm();
    at.col(l).tail(r).setZero();
  }
  return std::sqrt(dropped2);
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::lyap_p: return "lyap-p";
    case Method::lyap_q: return "lyap-q";
    case Method::proposed: return "proposed";
    case Method::van_loan: return "vanloan";
    case Method::naive_a: return "naive-a";
    case Method::naive_b: return "naive-b";
    case Method::oracle: return "oracle";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : all_methods()) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::lyap_p,  Method::lyap_q,  Method::proposed,
                                           Method::van_loan, Method::naive_a, Method::naive_b,
                                           Method::oracle};
  return methods;
}

bool is_exact(Method method) {
  return method != Method::naive_a && method != Method::naive_b;
}

template <typename Real>
ContinuousModel<Real>::ContinuousModel(Matrix<Real> a, Matrix<Real> s) {
  linalg::require_square(a, "ContinuousModel(A)");
  linalg::require_square(s, "ContinuousModel(S)");
  if (a.rows() < 1 || s.rows() != a.rows()) {
    throw Error(ErrorKind::dimension, "ContinuousModel: A and S must be n x n with n >= 1");
  }
  linalg::require_finite(a, "ContinuousModel(A)");
  linalg::require_finite(s, "ContinuousModel(S)");
  s = linalg::symmetrized<Real>(s);
  const Real tau_psd = Real(100) * static_cast<Real>(s.rows()) * linalg::machine_epsilon<Real>() *
                       linalg::frobenius_norm(s);
  const Real lowest = linalg::min_symmetric_eigenvalue(s);
  if (lowest < -tau_psd) {
    std::ostringstream os;
    os << "ContinuousModel: S is not positive semidefinite (min eigenvalue " << lowest << ")";
    throw Error(ErrorKind::precondition, os.str());
  }
  a_ = std::move(a);
  s_ = std::move(s);
}

template <typename Real>
MethodReport<Real> discretize_lyap_p(const ContinuousModel<Real>& m, Real t) {
  require_horizon(t, "lyap-p");
  if (t == Real(0)) return degenerate_report(m, Method::lyap_p);
  const Matrix<Real>& a = m.a();
  const Matrix<Real>& s = m.s();

  const Real margin = linalg::singularity_threshold(linalg::frobenius_norm(a), Real(0));
  for (const auto& lambda : linalg::eigenvalues(a)) {
    if (lambda.real() >= -margin) {
      std::ostringstream os;
      os << "lyap-p not applicable: drift is not strictly stable (eigenvalue " << lambda.real()
         << (lambda.imag() < 0 ? "-" : "+") << std::abs(lambda.imag()) << "i)";
      throw Error(ErrorKind::not_applicable, os.str());
    }
  }

  Matrix<Real> p;
  try {
    p = linalg::solve_lyapunov<Real>(a, -s);
  } catch (const NearSingularError& e) {
    rethrow_as_not_applicable(e, "lyap-p");
  }
  Matrix<Real> f = linalg::mat_exp(a, t);
  Matrix<Real> q = linalg::symmetrized<Real>(p - f * p * f.transpose());

  Diagnostics d;
  d["lyapunov_residual"] =
      static_cast<double>(linalg::sylvester_residual<Real>(a, a.transpose(), -s, p));
  return finish(m, Method::lyap_p, std::move(f), std::move(q), t, std::move(d));
}

template <typename Real>
MethodReport<Real> discretize_lyap_q(const ContinuousModel<Real>& m, Real t) {
  require_horizon(t, "lyap-q");
  if (t == Real(0)) return degenerate_report(m, Method::lyap_q);
  const Matrix<Real>& a = m.a();
  const Matrix<Real>& s = m.s();

  Matrix<Real> f = linalg::mat_exp(a, t);
  const Matrix<Real> v = linalg::symmetrized<Real>(s - f * s * f.transpose());
  Matrix<Real> q;
  try {
    q = linalg::solve_lyapunov<Real>(a, -v);
  } catch (const NearSingularError& e) {
    rethrow_as_not_applicable(e, "lyap-q");
  }

  Diagnostics d;
  d["lyapunov_residual"] =
      static_cast<double>(linalg::sylvester_residual<Real>(a, a.transpose(), -v, q));
  return finish(m, Method::lyap_q, std::move(f), std::move(q), t, std::move(d));
}

template <typename Real>
Matrix<Real> q_nilpotent(const Matrix<Real>& a22, const Matrix<Real>& s22, Real t,
                         std::optional<Real> tau) {
  linalg::require_square(a22, "q_nilpotent(a22)");
  linalg::require_square(s22, "q_nilpotent(s22)");
  if (a22.rows() != s22.rows()) {
    throw Error(ErrorKind::dimension, "q_nilpotent: a22 and s22 differ in size");
  }
  require_horizon(t, "q_nilpotent");
  const Index p = a22.rows();
  if (p == 0) return Matrix<Real>(0, 0);

  const Real norm = linalg::frobenius_norm(a22);
  const Real tol = tau ? *tau : linalg::default_tau_zero(p, norm, p);

  // powers[i] = a22^i, i = 0..p
  std::vector<Matrix<Real>> powers;
  powers.reserve(static_cast<std::size_t>(p + 1));
  powers.push_back(Matrix<Real>::Identity(p, p));
  for (Index i = 1; i <= p; ++i) powers.push_back(powers.back() * a22);
  const Real bound = Real(p) * tol * std::pow(norm + tol, Real(p - 1));
  if (linalg::frobenius_norm(powers.back()) > bound) {
    std::ostringstream os;
    os << "q_nilpotent: block is not nilpotent (||N^" << p
       << "||_F = " << linalg::frobenius_norm(powers.back()) << " > " << bound << ")";
    throw Error(ErrorKind::precondition, os.str());
  }

  // coefficient T^{i+j+1} / (i! j! (i+j+1))
  std::vector<Real> inv_factorial(static_cast<std::size_t>(p), Real(1));
  for (Index i = 1; i < p; ++i) inv_factorial[i] = inv_factorial[i - 1] / Real(i);

  Matrix<Real> q = Matrix<Real>::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    const Matrix<Real> left = powers[i] * s22;
    for (Index j = 0; j < p; ++j) {
      const Real coeff = std::pow(t, Real(i + j + 1)) * inv_factorial[i] * inv_factorial[j] /
                         Real(i + j + 1);
      q.noalias() += coeff * left * powers[j].transpose();
    }
  }
  return linalg::symmetrized<Real>(q);
}

template <typename Real>
MethodReport<Real> discretize_proposed(const ContinuousModel<Real>& m, Real t,
                                       const ProposedOptions<Real>& options) {
  require_horizon(t, "proposed");
  if (t == Real(0)) return degenerate_report(m, Method::proposed);
  const Index n = m.dim();

  // 1. orthogonal block-triangularization with integrators last
  const auto schur = linalg::real_schur(m.a());
  const auto ordered = linalg::order_schur_zeros_last(schur.u, schur.t, options.tau_zero);
  const Index k = ordered.split;
  const Index p = n - k;
  Matrix<Real> u = ordered.u;
  Matrix<Real> at = ordered.t;
  // integrators are exact zeros, not eps^(1/p)-sized rounding debris
  const Real dropped = make_exactly_nilpotent(at, u, k);
  const Matrix<Real> u_inv = u.partialPivLu().inverse();
  const Matrix<Real> st = linalg::symmetrized<Real>(u_inv * m.s() * u_inv.transpose());

  const Matrix<Real> a11 = at.topLeftCorner(k, k);
  const Matrix<Real> a12 = at.topRightCorner(k, p);
  const Matrix<Real> a22 = at.bottomRightCorner(p, p);

  if (k > 0) {
    const auto ev = linalg::quasi_triangular_eigenvalues(a11);
    const Real norm11 = linalg::frobenius_norm(a11);
    const Real threshold = linalg::singularity_threshold(norm11, norm11);
    for (const auto& x : ev) {
      for (const auto& y : ev) {
        if (std::abs(x + y) <= threshold) {
          std::ostringstream os;
          os << "proposed: unsupported spectrum, non-zero eigenvalues " << x.real()
             << (x.imag() < 0 ? "-" : "+") << std::abs(x.imag()) << "i and " << y.real()
             << (y.imag() < 0 ? "-" : "+") << std::abs(y.imag())
             << "i are mirrored in the imaginary axis";
          throw Error(ErrorKind::unsupported_spectrum, os.str());
        }
      }
    }
  }

  // 2-3.
  const Matrix<Real> ft = linalg::mat_exp(at, t);
  const Matrix<Real> vt = linalg::symmetrized<Real>(st - ft * st * ft.transpose());

  // 4a-4c.
  Diagnostics d;
  Matrix<Real> qt = Matrix<Real>::Zero(n, n);
  Matrix<Real> q22(p, p);
  Matrix<Real> q12(k, p);
  if (p > 0) {
    q22 = q_nilpotent<Real>(a22, st.bottomRightCorner(p, p), t, ordered.tau_zero);
    qt.bottomRightCorner(p, p) = q22;
  }
  if (k > 0 && p > 0) {
    const Matrix<Real> rhs = -vt.topRightCorner(k, p) - a12 * q22;
    const Matrix<Real> a22t = a22.transpose();
    q12 = linalg::solve_sylvester<Real>(a11, a22t, rhs);
    qt.topRightCorner(k, p) = q12;
    qt.bottomLeftCorner(p, k) = q12.transpose();
    d["sylvester_residual"] =
        static_cast<double>(linalg::sylvester_residual<Real>(a11, a22t, rhs, q12));
  }
  if (k > 0) {
    Matrix<Real> rhs = -vt.topLeftCorner(k, k);
    if (p > 0) rhs -= a12 * q12.transpose() + q12 * a12.transpose();
    rhs = linalg::symmetrized<Real>(rhs);
    const Matrix<Real> q11 = linalg::solve_lyapunov<Real>(a11, rhs);
    qt.topLeftCorner(k, k) = q11;
    d["lyapunov_residual"] =
        static_cast<double>(linalg::sylvester_residual<Real>(a11, a11.transpose(), rhs, q11));
  } else {
    d["lyapunov_residual"] = kNotAvailable;
  }

  // 5.
  const DiscreteModel<Real> back = transform_result<Real>({ft, qt, t}, u, u_inv);

  d["split"] = static_cast<double>(k);
  d["integrators"] = static_cast<double>(p);
  d["tau_zero"] = static_cast<double>(ordered.tau_zero);
  d["nilpotent_projection"] = static_cast<double>(dropped);
  d["orthogonality"] = static_cast<double>(
      linalg::frobenius_norm<Real>(u.transpose() * u - Matrix<Real>::Identity(n, n)));
  return finish(m, Method::proposed, back.f, back.q, t, std::move(d));
}

template <typename Real>
MethodReport<Real> discretize_vanloan(const ContinuousModel<Real>& m, Real t) {
  require_horizon(t, "vanloan");
  if (t == Real(0)) return degenerate_report(m, Method::van_loan);
  const Index n = m.dim();
  Matrix<Real> h = Matrix<Real>::Zero(2 * n, 2 * n);
  h.topLeftCorner(n, n) = m.a();
  h.topRightCorner(n, n) = m.s();
  h.bottomRightCorner(n, n) = -m.a().transpose();

  const Matrix<Real> e = linalg::mat_exp(h, t);
  Matrix<Real> f = e.topLeftCorner(n, n);
  Matrix<Real> q = linalg::symmetrized<Real>(e.topRightCorner(n, n) * f.transpose());
  if (!q.allFinite()) {
    throw Error(ErrorKind::overflow, "vanloan: Q = M12 M11^T is not finite");
  }
  return finish(m, Method::van_loan, std::move(f), std::move(q), t, {});
}

template <typename Real>
Matrix<Real> naive_q_a(const ContinuousModel<Real>& m, Real t) {
  require_horizon(t, "naive-a");
  const Index n = m.dim();
  if (t == Real(0)) return Matrix<Real>::Zero(n, n);
  // top-right block of exp([[A, I], [0, 0]] t) is int_0^t e^{A tau} d tau
  Matrix<Real> aug = Matrix<Real>::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = m.a();
  aug.topRightCorner(n, n) = Matrix<Real>::Identity(n, n);
  const Matrix<Real> g = linalg::mat_exp(aug, t).topRightCorner(n, n);
  return linalg::symmetrized<Real>(g * m.s() * g.transpose() / t);
}

template <typename Real>
Matrix<Real> naive_q_b(const ContinuousModel<Real>& m, Real t) {
  require_horizon(t, "naive-b");
  return t * m.s();
}

Matrix<double> q_oracle(const ContinuousModel<double>& m, double t, const OracleOptions& options) {
  require_horizon(t, "oracle");
  if (!(options.rel_tol > 0)) {
    throw Error(ErrorKind::precondition, "oracle: rel_tol must be > 0");
  }
  const Index n = m.dim();
  if (t == 0.0) return Matrix<double>::Zero(n, n);
  const Matrix<double>& a = m.a();
  const Matrix<double>& s = m.s();
  auto integrand = [&](const Matrix<double>& e) -> Matrix<double> { return e * s * e.transpose(); };

  // steps[b] = e^{A t / 2^b}; the node j t / 2^k is the product of steps over the set bits of j.
  std::vector<Matrix<double>> steps{linalg::mat_exp(a, t)};
  const Matrix<double> ends = 0.5 * (s + integrand(steps[0]));
  Matrix<double> interior = Matrix<double>::Zero(n, n);
  std::vector<Matrix<double>> previous{t * ends};

  for (int level = 1; level <= options.max_depth; ++level) {
    const double h = std::ldexp(t, -level);
    steps.push_back(linalg::mat_exp(a, h));
    const std::uint64_t count = std::uint64_t{1} << level;
    for (std::uint64_t j = 1; j < count; j += 2) {
      Matrix<double> e = steps[static_cast<std::size_t>(level)];
      std::uint64_t rest = j >> 1;
      for (int bit = 1; rest != 0; ++bit, rest >>= 1) {
        if (rest & 1U) e = e * steps[static_cast<std::size_t>(level - bit)];
      }
      interior += integrand(e);
    }

    std::vector<Matrix<double>> row;
    row.reserve(static_cast<std::size_t>(level + 1));
    row.push_back(h * (ends + interior));
    double factor = 1.0;
    for (int i = 1; i <= level; ++i) {
      factor *= 4.0;
      row.push_back(row[i - 1] + (row[i - 1] - previous[i - 1]) / (factor - 1.0));
    }
    if (level >= options.min_depth) {
      const double change = (row.back() - previous.back()).norm();
      if (!row.back().allFinite()) break;
      if (change <= options.rel_tol * row.back().norm()) {
        return linalg::symmetrized<double>(row.back());
      }
    }
    previous = std::move(row);
  }
  throw Error(ErrorKind::convergence, "oracle: quadrature did not converge within " +
                                          std::to_string(options.max_depth) + " doublings");
}

template <typename Real>
ContinuousModel<Real> transform_model(const ContinuousModel<Real>& m, const Matrix<Real>& u,
                                      const Matrix<Real>& u_inv) {
  const Index n = m.dim();
  if (u.rows() != n || u.cols() != n || u_inv.rows() != n || u_inv.cols() != n) {
    throw Error(ErrorKind::dimension, "transform_model: u and u_inv must match the state size");
  }
  return ContinuousModel<Real>(u_inv * m.a() * u, u_inv * m.s() * u_inv.transpose());
}

template <typename Real>
DiscreteModel<Real> transform_result(const DiscreteModel<Real>& d, const Matrix<Real>& u,
                                     const Matrix<Real>& u_inv) {
  const Index n = d.f.rows();
  if (u.rows() != n || u.cols() != n || u_inv.rows() != n || u_inv.cols() != n ||
      d.q.rows() != n || d.q.cols() != n) {
    throw Error(ErrorKind::dimension, "transform_result: u and u_inv must match the state size");
  }
  return {u * d.f * u_inv, linalg::symmetrized<Real>(u * d.q * u.transpose()), d.horizon};
}

template <typename Real>
MethodReport<Real> discretize(const ContinuousModel<Real>& m, Method method, Real t,
                              const OracleOptions& oracle) {
  require_horizon(t, method_name(method));
  if (t == Real(0)) return degenerate_report(m, method);
  switch (method) {
    case Method::lyap_p: return discretize_lyap_p(m, t);
    case Method::lyap_q: return discretize_lyap_q(m, t);
    case Method::proposed: return discretize_proposed(m, t);
    case Method::van_loan: return discretize_vanloan(m, t);
    case Method::naive_a:
      return finish(m, method, linalg::mat_exp(m.a(), t), naive_q_a(m, t), t, {});
    case Method::naive_b:
      return finish(m, method, linalg::mat_exp(m.a(), t), naive_q_b(m, t), t, {});
    case Method::oracle: {
      Matrix<Real> q;
      if constexpr (std::is_same_v<Real, double>) {
        q = q_oracle(m, t, oracle);
      } else {
        q = q_oracle(m.template cast<double>(), static_cast<double>(t), oracle)
                .template cast<Real>();
      }
      return finish(m, method, linalg::mat_exp(m.a(), t), std::move(q), t, {});
    }
  }
  throw Error(ErrorKind::precondition, "discretize: unknown method");
}

template <typename Real>
Real semigroup_residual(const ContinuousModel<Real>& m, Method method, Real t1, Real t2,
                        const OracleOptions& oracle) {
  const auto first = discretize(m, method, t1, oracle);
  const auto second = discretize(m, method, t2, oracle);
  const auto whole = discretize(m, method, t1 + t2, oracle);
  const Matrix<Real>& f2 = second.model.f;
  const Matrix<Real> composed = f2 * first.model.q * f2.transpose() + second.model.q;
  const Real denom = std::max(linalg::spectral_norm(whole.model.q), residual_floor(m));
  return linalg::spectral_norm<Real>(whole.model.q - composed) / denom;
}

template <typename Real>
Real lemma2_residual(const ContinuousModel<Real>& m, const Matrix<Real>& f,
                     const Matrix<Real>& q) {
  const Index n = m.dim();
  if (f.rows() != n || f.cols() != n || q.rows() != n || q.cols() != n) {
    throw Error(ErrorKind::dimension, "lemma2_residual: F and Q must match the state size");
  }
  const Matrix<Real>& a = m.a();
  const Matrix<Real>& s = m.s();
  const Matrix<Real> r = a * q + q * a.transpose() + s - f * s * f.transpose();
  const Real norm_f = linalg::spectral_norm(f);
  const Real norm_s = linalg::spectral_norm(s);
  const Real scale = Real(2) * linalg::spectral_norm(a) * linalg::spectral_norm(q) +
                     (Real(1) + norm_f * norm_f) * norm_s;
  return linalg::spectral_norm(r) / std::max(scale, residual_floor(m));
}

template <typename Real>
Real relative_error(const Matrix<Real>& x, const Matrix<Real>& y) {
  const Real diff = linalg::spectral_norm<Real>(x - y);
  const Real ref = linalg::spectral_norm(y);
  return ref > Real(0) ? diff / ref : diff;
}

#define STOCHDISC_INSTANTIATE(Real)                                                              \
  template class ContinuousModel<Real>;                                                          \
  template MethodReport<Real> discretize_lyap_p<Real>(const ContinuousModel<Real>&, Real);       \
  template MethodReport<Real> discretize_lyap_q<Real>(const ContinuousModel<Real>&, Real);       \
  template MethodReport<Real> discretize_proposed<Real>(const ContinuousModel<Real>&, Real,      \
                                                        const ProposedOptions<Real>&);           \
  template MethodReport<Real> discretize_vanloan<Real>(const ContinuousModel<Real>&, Real);      \
  template Matrix<Real> q_nilpotent<Real>(const Matrix<Real>&, const Matrix<Real>&, Real,        \
                                          std::optional<Real>);                                  \
  template Matrix<Real> naive_q_a<Real>(const ContinuousModel<Real>&, Real);                     \
  template Matrix<Real> naive_q_b<Real>(const ContinuousModel<Real>&, Real);                     \
  template ContinuousModel<Real> transform_model<Real>(                                          \
      const ContinuousModel<Real>&, const Matrix<Real>&, const Matrix<Real>&);                   \
  template DiscreteModel<Real> transform_result<Real>(const DiscreteModel<Real>&,                \
                                                      const Matrix<Real>&, const Matrix<Real>&); \
  template MethodReport<Real> discretize<Real>(const ContinuousModel<Real>&, Method, Real,       \
                                               const OracleOptions&);                            \
  template Real semigroup_residual<Real>(const ContinuousModel<Real>&, Method, Real, Real,       \
                                         const OracleOptions&);                                  \
  template Real lemma2_residual<Real>(const ContinuousModel<Real>&, const Matrix<Real>&,         \
                                      const Matrix<Real>&);                                      \
  template Real relative_error<Real>(const Matrix<Real>&, const Matrix<Real>&);

STOCHDISC_INSTANTIATE(float)
STOCHDISC_INSTANTIATE(double)

#undef STOCHDISC_INSTANTIATE

}  // namespace stochdisc
