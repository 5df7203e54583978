#include "stochdisc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "stochdisc/errors.hpp"

namespace stochdisc::linalg {

namespace {

template <typename Real>
Matrix<Real> identity(Index n) {
  return Matrix<Real>::Identity(n, n);
}

std::string dims(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

// ---------------------------------------------------------------------------
// Matrix exponential

// Pade numerator/denominator pieces: e^A ~ (V - U)^{-1} (V + U).
template <typename Real>
void pade3(const Matrix<Real>& a, Matrix<Real>& u, Matrix<Real>& v) {
  const Real b[] = {120, 60, 12, 1};
  const Index n = a.rows();
  const Matrix<Real> a2 = a * a;
  u = a * (b[3] * a2 + b[1] * identity<Real>(n));
  v = b[2] * a2 + b[0] * identity<Real>(n);
}

template <typename Real>
void pade5(const Matrix<Real>& a, Matrix<Real>& u, Matrix<Real>& v) {
  const Real b[] = {30240, 15120, 3360, 420, 30, 1};
  const Index n = a.rows();
  const Matrix<Real> a2 = a * a;
  const Matrix<Real> a4 = a2 * a2;
  u = a * (b[5] * a4 + b[3] * a2 + b[1] * identity<Real>(n));
  v = b[4] * a4 + b[2] * a2 + b[0] * identity<Real>(n);
}

template <typename Real>
void pade7(const Matrix<Real>& a, Matrix<Real>& u, Matrix<Real>& v) {
  const Real b[] = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
  const Index n = a.rows();
  const Matrix<Real> a2 = a * a;
  const Matrix<Real> a4 = a2 * a2;
  const Matrix<Real> a6 = a4 * a2;
  u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * identity<Real>(n));
  v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * identity<Real>(n);
}

template <typename Real>
void pade9(const Matrix<Real>& a, Matrix<Real>& u, Matrix<Real>& v) {
  const Real b[] = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                    2162160.0,     110880.0,     3960.0,       90.0,        1.0};
  const Index n = a.rows();
  const Matrix<Real> a2 = a * a;
  const Matrix<Real> a4 = a2 * a2;
  const Matrix<Real> a6 = a4 * a2;
  const Matrix<Real> a8 = a6 * a2;
  u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * identity<Real>(n));
  v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * identity<Real>(n);
}

template <typename Real>
void pade13(const Matrix<Real>& a, Matrix<Real>& u, Matrix<Real>& v) {
  const Real b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                    1187353796428800.0,  129060195264000.0,   10559470521600.0,
                    670442572800.0,      33522128640.0,       1323241920.0,
                    40840800.0,          960960.0,            16380.0,
                    182.0,               1.0};
  const Index n = a.rows();
  const Matrix<Real> a2 = a * a;
  const Matrix<Real> a4 = a2 * a2;
  const Matrix<Real> a6 = a4 * a2;
  const Matrix<Real> inner_u = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
  u = a * (inner_u + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * identity<Real>(n));
  const Matrix<Real> inner_v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
  v = inner_v + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * identity<Real>(n);
}

// Degree and scaling selection (1-norm thresholds for the backward error of
// the diagonal Pade approximant at the unit roundoff of each width).
template <typename Real>
int pade_uv(const Matrix<Real>& a, Matrix<Real>& u, Matrix<Real>& v);

template <>
int pade_uv<float>(const Matrix<float>& a, Matrix<float>& u, Matrix<float>& v) {
  const float l1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (l1 < 4.258730016922831e-1f) {
    pade3(a, u, v);
    return 0;
  }
  if (l1 < 1.880152677804762f) {
    pade5(a, u, v);
    return 0;
  }
  int squarings = 0;
  std::frexp(l1 / 3.925724783138660f, &squarings);
  squarings = std::max(squarings, 0);
  pade7<float>(a * std::ldexp(1.0f, -squarings), u, v);
  return squarings;
}

template <>
int pade_uv<double>(const Matrix<double>& a, Matrix<double>& u, Matrix<double>& v) {
  const double l1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (l1 < 1.495585217958292e-2) {
    pade3(a, u, v);
    return 0;
  }
  if (l1 < 2.539398330063230e-1) {
    pade5(a, u, v);
    return 0;
  }
  if (l1 < 9.504178996162932e-1) {
    pade7(a, u, v);
    return 0;
  }
  if (l1 < 2.097847961257068) {
    pade9(a, u, v);
    return 0;
  }
  int squarings = 0;
  std::frexp(l1 / 5.371920351148152, &squarings);
  squarings = std::max(squarings, 0);
  pade13<double>(a * std::ldexp(1.0, -squarings), u, v);
  return squarings;
}

// ---------------------------------------------------------------------------
// Quasi-triangular block structure

struct Block {
  Index start;
  Index size;
};

template <typename Real>
std::vector<Block> diagonal_blocks(const Matrix<Real>& t) {
  std::vector<Block> blocks;
  const Index n = t.rows();
  Index i = 0;
  while (i < n) {
    if (i + 1 < n && t(i + 1, i) != Real(0)) {
      blocks.push_back({i, 2});
      i += 2;
    } else {
      blocks.push_back({i, 1});
      i += 1;
    }
  }
  return blocks;
}

template <typename Real>
void block_eigenvalues(const Matrix<Real>& t, const Block& b,
                       std::vector<std::complex<Real>>& out) {
  if (b.size == 1) {
    out.emplace_back(t(b.start, b.start), Real(0));
    return;
  }
  const Real a = t(b.start, b.start);
  const Real bb = t(b.start, b.start + 1);
  const Real c = t(b.start + 1, b.start);
  const Real d = t(b.start + 1, b.start + 1);
  const Real mid = (a + d) / 2;
  const Real half = (a - d) / 2;
  const Real disc = half * half + bb * c;
  if (disc >= 0) {
    const Real root = std::sqrt(disc);
    out.emplace_back(mid + root, Real(0));
    out.emplace_back(mid - root, Real(0));
  } else {
    const Real root = std::sqrt(-disc);
    out.emplace_back(mid, root);
    out.emplace_back(mid, -root);
  }
}

// Rotates a 2x2 diagonal block with real eigenvalues at (j, j) into upper
// triangular form, updating the whole of t and the columns of u. Returns false
// (and leaves everything untouched) if the block has complex eigenvalues.
template <typename Real>
bool split_real_block(Matrix<Real>& u, Matrix<Real>& t, Index j) {
  const Index n = t.rows();
  const Real a = t(j, j);
  const Real b = t(j, j + 1);
  const Real c = t(j + 1, j);
  const Real d = t(j + 1, j + 1);
  if (c == Real(0)) return true;
  const Real half = (a - d) / 2;
  const Real disc = half * half + b * c;
  if (disc < 0) return false;
  const Real lambda = (a + d) / 2 + (half >= 0 ? std::sqrt(disc) : -std::sqrt(disc));
  Eigen::Matrix<Real, 2, 1> v1(b, lambda - a);
  Eigen::Matrix<Real, 2, 1> v2(lambda - d, c);
  Eigen::Matrix<Real, 2, 1> v = v1.norm() >= v2.norm() ? v1 : v2;
  const Real len = v.norm();
  if (len == Real(0)) {
    t(j + 1, j) = 0;
    return true;
  }
  v /= len;
  Eigen::Matrix<Real, 2, 2> g;
  g << v(0), -v(1), v(1), v(0);
  t.block(j, j, 2, n - j) = (g.transpose() * t.block(j, j, 2, n - j)).eval();
  t.block(0, j, j + 2, 2) = (t.block(0, j, j + 2, 2) * g).eval();
  u.middleCols(j, 2) = (u.middleCols(j, 2) * g).eval();
  t(j + 1, j) = 0;
  return true;
}

// Swaps the adjacent diagonal blocks of sizes n1 (at j) and n2 (at j + n1)
// with an orthogonal similarity built from the invariant subspace of the
// second block.
template <typename Real>
void swap_adjacent_blocks(Matrix<Real>& u, Matrix<Real>& t, Index j, Index n1, Index n2) {
  const Index n = t.rows();
  const Index m = n1 + n2;
  const Matrix<Real> t11 = t.block(j, j, n1, n1);
  const Matrix<Real> t12 = t.block(j, j + n1, n1, n2);
  const Matrix<Real> t22 = t.block(j + n1, j + n1, n2, n2);

  // t11 x - x t22 = t12, column-major vec.
  Matrix<Real> kron = Matrix<Real>::Zero(n1 * n2, n1 * n2);
  for (Index c = 0; c < n2; ++c) {
    kron.block(c * n1, c * n1, n1, n1) += t11;
    for (Index r = 0; r < n2; ++r) {
      kron.block(c * n1, r * n1, n1, n1) -= t22(r, c) * identity<Real>(n1);
    }
  }
  Eigen::FullPivLU<Matrix<Real>> lu(kron);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::classification,
                "cannot swap diagonal blocks with a common eigenvalue");
  }
  const Matrix<Real> rhs = Eigen::Map<const Matrix<Real>>(t12.data(), n1 * n2, 1);
  const Matrix<Real> xvec = lu.solve(rhs);
  const Matrix<Real> x = Eigen::Map<const Matrix<Real>>(xvec.data(), n1, n2);

  Matrix<Real> basis(m, n2);
  basis.topRows(n1) = x;
  basis.bottomRows(n2) = -identity<Real>(n2);
  Eigen::HouseholderQR<Matrix<Real>> qr(basis);
  const Matrix<Real> q = qr.householderQ() * identity<Real>(m);

  const Real dnorm = t.block(j, j, m, m).norm();
  t.block(j, j, m, n - j) = (q.transpose() * t.block(j, j, m, n - j)).eval();
  t.block(0, j, j + m, m) = (t.block(0, j, j + m, m) * q).eval();
  u.middleCols(j, m) = (u.middleCols(j, m) * q).eval();

  const Real leak = t.block(j + n2, j, n1, n2).norm();
  if (leak > Real(100) * machine_epsilon<Real>() * dnorm) {
    std::ostringstream os;
    os << "diagonal block swap rejected: residual " << leak << " exceeds tolerance for block norm "
       << dnorm;
    throw Error(ErrorKind::convergence, os.str());
  }
  t.block(j + n2, j, n1, n2).setZero();

  if (n2 == 2) split_real_block(u, t, j);
  if (n1 == 2) split_real_block(u, t, j + n2);
}

template <typename Real>
Real max_modulus(const std::vector<std::complex<Real>>& ev) {
  Real r = 0;
  for (const auto& z : ev) r = std::max(r, std::abs(z));
  return r;
}

// a = u t u^T with t upper quasi-triangular. Inputs that already have that
// shape (or its lower-triangular mirror) skip the Schur factorization; the
// mirror is handled with the exchange permutation, which is exact.
template <typename Real>
struct TriangularForm {
  Matrix<Real> u;
  Matrix<Real> t;
};

template <typename Real>
TriangularForm<Real> triangular_form(const Matrix<Real>& a) {
  const Index n = a.rows();
  if (is_quasi_upper_triangular(a)) return {identity<Real>(n), a};
  Matrix<Real> mirrored = a.reverse();
  if (is_quasi_upper_triangular(mirrored)) {
    return {identity<Real>(n).rowwise().reverse(), std::move(mirrored)};
  }
  auto schur = real_schur(a);
  return {std::move(schur.u), std::move(schur.t)};
}

// Solves ta y + y tb = f for upper quasi-triangular ta (p x p) and tb (q x q).
template <typename Real>
Matrix<Real> solve_quasi_triangular(const Matrix<Real>& ta, const Matrix<Real>& tb,
                                    const Matrix<Real>& f) {
  const Index p = ta.rows();
  const Index q = tb.rows();
  Matrix<Real> y = Matrix<Real>::Zero(p, q);
  const auto row_blocks = diagonal_blocks(ta);
  const auto col_blocks = diagonal_blocks(tb);

  for (const Block& cb : col_blocks) {
    const Index c0 = cb.start;
    const Index qs = cb.size;
    Matrix<Real> rhs_col = f.middleCols(c0, qs);
    if (c0 > 0) rhs_col -= y.leftCols(c0) * tb.block(0, c0, c0, qs);
    const Matrix<Real> tbjj = tb.block(c0, c0, qs, qs);

    for (auto it = row_blocks.rbegin(); it != row_blocks.rend(); ++it) {
      const Index r0 = it->start;
      const Index ps = it->size;
      const Index tail = p - r0 - ps;
      Matrix<Real> rhs = rhs_col.middleRows(r0, ps);
      if (tail > 0) rhs -= ta.block(r0, r0 + ps, ps, tail) * y.block(r0 + ps, c0, tail, qs);
      const Matrix<Real> taii = ta.block(r0, r0, ps, ps);

      if (ps == 1 && qs == 1) {
        y(r0, c0) = rhs(0, 0) / (taii(0, 0) + tbjj(0, 0));
        continue;
      }
      // (I_qs (x) taii + tbjj^T (x) I_ps) vec(y) = vec(rhs)
      Matrix<Real> kron = Matrix<Real>::Zero(ps * qs, ps * qs);
      for (Index c = 0; c < qs; ++c) {
        kron.block(c * ps, c * ps, ps, ps) += taii;
        for (Index r = 0; r < qs; ++r) {
          kron.block(c * ps, r * ps, ps, ps) += tbjj(r, c) * identity<Real>(ps);
        }
      }
      const Matrix<Real> rvec = Eigen::Map<const Matrix<Real>>(rhs.data(), ps * qs, 1);
      const Matrix<Real> yvec = kron.fullPivLu().solve(rvec);
      y.block(r0, c0, ps, qs) = Eigen::Map<const Matrix<Real>>(yvec.data(), ps, qs);
    }
  }
  return y;
}

template <typename Real>
void guard_eigenvalue_sums(const Matrix<Real>& ta, const Matrix<Real>& tb, Real threshold) {
  const auto la = quasi_triangular_eigenvalues(ta);
  const auto lb = quasi_triangular_eigenvalues(tb);
  Real best = std::numeric_limits<Real>::infinity();
  std::complex<Real> worst_a, worst_b;
  for (const auto& x : la) {
    for (const auto& y : lb) {
      const Real s = std::abs(x + y);
      if (s < best) {
        best = s;
        worst_a = x;
        worst_b = y;
      }
    }
  }
  if (best <= threshold) {
    throw NearSingularError(std::complex<double>(worst_a), std::complex<double>(worst_b),
                            static_cast<double>(threshold));
  }
}

template <typename Real>
Matrix<Real> sylvester_from_forms(const TriangularForm<Real>& fa, const TriangularForm<Real>& fb,
                                  const Matrix<Real>& c, Real threshold) {
  guard_eigenvalue_sums(fa.t, fb.t, threshold);
  const Matrix<Real> f = fa.u.transpose() * c * fb.u;
  const Matrix<Real> y = solve_quasi_triangular(fa.t, fb.t, f);
  Matrix<Real> x = fa.u * y * fb.u.transpose();
  if (!x.allFinite()) {
    throw Error(ErrorKind::overflow, "Sylvester solution is not finite");
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------

template <typename Real>
void require_finite(const Matrix<Real>& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::non_finite, std::string(what) + ": matrix has non-finite entries");
  }
}

template <typename Real>
void require_square(const Matrix<Real>& m, std::string_view what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::dimension,
                std::string(what) + ": expected a square matrix, got " + dims(m.rows(), m.cols()));
  }
}

template <typename Real>
Real spectral_norm(const Matrix<Real>& m) {
  require_finite(m, "spectral_norm");
  if (m.size() == 0) return Real(0);
  Eigen::JacobiSVD<Matrix<Real>> svd(m);
  return svd.singularValues()(0);
}

template <typename Real>
Matrix<Real> mat_exp(const Matrix<Real>& a, Real t) {
  require_square(a, "mat_exp");
  require_finite(a, "mat_exp");
  if (!std::isfinite(t)) throw Error(ErrorKind::non_finite, "mat_exp: non-finite time");
  const Index n = a.rows();
  if (t == Real(0) || n == 0) return identity<Real>(n);

  const Matrix<Real> at = a * t;
  if (!at.allFinite()) throw Error(ErrorKind::overflow, "mat_exp: a*t overflows");

  Matrix<Real> u, v;
  const int squarings = pade_uv(at, u, v);
  Matrix<Real> result = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) result = (result * result).eval();

  if (!result.allFinite()) {
    std::ostringstream os;
    os << "mat_exp: result overflows (||a t||_1 = " << at.cwiseAbs().colwise().sum().maxCoeff()
       << ", " << squarings << " squarings)";
    throw Error(ErrorKind::overflow, os.str());
  }
  return result;
}

template <typename Real>
SchurPair<Real> real_schur(const Matrix<Real>& a, int max_iterations_per_row) {
  require_square(a, "real_schur");
  require_finite(a, "real_schur");
  const Index n = a.rows();
  if (n == 0) return {Matrix<Real>(0, 0), Matrix<Real>(0, 0)};

  Eigen::RealSchur<Matrix<Real>> schur(n);
  schur.setMaxIterations(max_iterations_per_row * n);
  schur.compute(a, true);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorKind::convergence,
                "real_schur: Francis QR did not converge within " +
                    std::to_string(max_iterations_per_row * n) + " sweeps");
  }
  SchurPair<Real> out{schur.matrixU(), schur.matrixT()};
  for (Index c = 0; c < n; ++c) {
    for (Index r = c + 2; r < n; ++r) out.t(r, c) = 0;
  }
  for (Index i = 0; i + 1 < n; ++i) {
    if (out.t(i + 1, i) != Real(0)) {
      split_real_block(out.u, out.t, i);
      ++i;
    }
  }
  return out;
}

template <typename Real>
Real default_tau_zero(Index n, Real norm_a, Index cluster_size) {
  const Real base = Real(100) * static_cast<Real>(std::max<Index>(n, 1)) * machine_epsilon<Real>();
  const Index k = std::max<Index>(cluster_size, 1);
  return norm_a * std::pow(base, Real(1) / static_cast<Real>(k));
}

template <typename Real>
OrderedSchur<Real> order_schur_zeros_last(const Matrix<Real>& u, const Matrix<Real>& t,
                                          std::optional<Real> tau_zero) {
  require_square(t, "order_schur_zeros_last");
  require_square(u, "order_schur_zeros_last");
  if (u.rows() != t.rows()) {
    throw Error(ErrorKind::dimension, "order_schur_zeros_last: u is " + dims(u.rows(), u.cols()) +
                                          ", t is " + dims(t.rows(), t.cols()));
  }
  if (!is_quasi_upper_triangular(t)) {
    throw Error(ErrorKind::precondition, "order_schur_zeros_last: t is not quasi-upper-triangular");
  }
  const Index n = t.rows();
  OrderedSchur<Real> out{u, t, n, Real(0)};
  if (n == 0) return out;

  const Real norm_a = frobenius_norm(t);
  Real tau;
  if (tau_zero) {
    tau = *tau_zero;
  } else {
    struct Entry {
      Real modulus;
      std::vector<std::complex<Real>> ev;
    };
    std::vector<Entry> blocks;
    for (const Block& b : diagonal_blocks(t)) {
      Entry e;
      block_eigenvalues(t, b, e.ev);
      e.modulus = max_modulus(e.ev);
      blocks.push_back(std::move(e));
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const Entry& x, const Entry& y) { return x.modulus < y.modulus; });

    // A rounded nilpotent block of size k has eigenvalues of size eps^(1/k),
    // but the coefficients of its characteristic polynomial move only by
    // O(eps): e_j(lambda) <= 100 n eps C(k, j) ||A||^j.
    const Real base = Real(100) * static_cast<Real>(n) * machine_epsilon<Real>();
    std::vector<std::complex<Real>> e(1, std::complex<Real>(1));  // e_0..e_count
    std::size_t cluster_blocks = 0;
    Index cluster = 0;
    Index count = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      for (const auto& z : blocks[i].ev) {
        e.push_back(std::complex<Real>(0));
        for (std::size_t j = e.size() - 1; j > 0; --j) e[j] += z * e[j - 1];
      }
      count += static_cast<Index>(blocks[i].ev.size());
      if (blocks[i].modulus > default_tau_zero(n, norm_a, count)) continue;
      bool small = true;
      Real binom = 1;
      Real scale = 1;
      for (std::size_t j = 1; j < e.size() && small; ++j) {
        binom = binom * static_cast<Real>(count - static_cast<Index>(j) + 1) / static_cast<Real>(j);
        scale *= norm_a;
        small = std::abs(e[j]) <= base * binom * scale;
      }
      if (small) {
        cluster = count;
        cluster_blocks = i + 1;
      }
    }
    // threshold halfway (geometrically) between the cluster and the rest
    tau = default_tau_zero(n, norm_a, std::max<Index>(cluster, 1));
    const Real lo = std::max(cluster_blocks > 0 ? blocks[cluster_blocks - 1].modulus : Real(0),
                             default_tau_zero(n, norm_a, 1));
    if (cluster_blocks < blocks.size() && blocks[cluster_blocks].modulus > lo) {
      tau = std::min(tau, std::sqrt(lo * blocks[cluster_blocks].modulus));
    }
  }
  out.tau_zero = tau;

  auto classify = [&](const Matrix<Real>& tt, std::vector<Block>& blocks) {
    blocks = diagonal_blocks(tt);
    std::vector<bool> zero;
    for (const Block& b : blocks) {
      std::vector<std::complex<Real>> ev;
      block_eigenvalues(tt, b, ev);
      const bool first = std::abs(ev.front()) <= tau;
      for (const auto& z : ev) {
        if ((std::abs(z) <= tau) != first) {
          throw Error(ErrorKind::classification,
                      "order_schur_zeros_last: a 2x2 block straddles the zero threshold");
        }
      }
      zero.push_back(first);
    }
    return zero;
  };

  std::vector<Block> blocks;
  auto zero = classify(out.t, blocks);
  Index zero_count = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (zero[i]) zero_count += blocks[i].size;
  }

  const Index max_swaps = n * n + 8;
  for (Index swaps = 0;; ++swaps) {
    std::size_t i = 0;
    while (i + 1 < blocks.size() && !(zero[i] && !zero[i + 1])) ++i;
    if (i + 1 >= blocks.size()) break;
    if (swaps >= max_swaps) {
      throw Error(ErrorKind::convergence, "order_schur_zeros_last: reordering did not terminate");
    }
    swap_adjacent_blocks(out.u, out.t, blocks[i].start, blocks[i].size, blocks[i + 1].size);
    zero = classify(out.t, blocks);
    Index recount = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (zero[b]) recount += blocks[b].size;
    }
    if (recount != zero_count) {
      throw Error(ErrorKind::classification,
                  "order_schur_zeros_last: eigenvalue classification changed during reordering");
    }
  }
  out.split = n - zero_count;
  return out;
}

template <typename Real>
bool is_quasi_upper_triangular(const Matrix<Real>& m) {
  if (m.rows() != m.cols()) return false;
  const Index n = m.rows();
  for (Index c = 0; c < n; ++c) {
    for (Index r = c + 2; r < n; ++r) {
      if (m(r, c) != Real(0)) return false;
    }
  }
  for (Index i = 0; i + 2 < n; ++i) {
    if (m(i + 1, i) != Real(0) && m(i + 2, i + 1) != Real(0)) return false;
  }
  return true;
}

template <typename Real>
std::vector<std::complex<Real>> quasi_triangular_eigenvalues(const Matrix<Real>& t) {
  std::vector<std::complex<Real>> out;
  out.reserve(static_cast<std::size_t>(t.rows()));
  for (const Block& b : diagonal_blocks(t)) block_eigenvalues(t, b, out);
  return out;
}

template <typename Real>
std::vector<std::complex<Real>> eigenvalues(const Matrix<Real>& a) {
  return quasi_triangular_eigenvalues(real_schur(a).t);
}

template <typename Real>
Real singularity_threshold(Real norm_a, Real norm_b) {
  return Real(100) * machine_epsilon<Real>() * (norm_a + norm_b);
}

template <typename Real>
Matrix<Real> solve_sylvester(const Matrix<Real>& a, const Matrix<Real>& b,
                             const Matrix<Real>& c) {
  require_square(a, "solve_sylvester(a)");
  require_square(b, "solve_sylvester(b)");
  if (c.rows() != a.rows() || c.cols() != b.rows()) {
    throw Error(ErrorKind::dimension, "solve_sylvester: c is " + dims(c.rows(), c.cols()) +
                                          ", expected " + dims(a.rows(), b.rows()));
  }
  require_finite(a, "solve_sylvester(a)");
  require_finite(b, "solve_sylvester(b)");
  require_finite(c, "solve_sylvester(c)");
  if (c.size() == 0) return Matrix<Real>(a.rows(), b.rows());

  const auto fa = triangular_form(a);
  const auto fb = triangular_form(b);
  return sylvester_from_forms(fa, fb, c,
                              singularity_threshold(frobenius_norm(a), frobenius_norm(b)));
}

template <typename Real>
Matrix<Real> solve_lyapunov(const Matrix<Real>& a, const Matrix<Real>& c) {
  require_square(a, "solve_lyapunov(a)");
  require_square(c, "solve_lyapunov(c)");
  if (c.rows() != a.rows()) {
    throw Error(ErrorKind::dimension, "solve_lyapunov: c is " + dims(c.rows(), c.cols()) +
                                          ", expected " + dims(a.rows(), a.rows()));
  }
  require_finite(a, "solve_lyapunov(a)");
  require_finite(c, "solve_lyapunov(c)");
  if (c.size() == 0) return c;

  // a^T = (u J)(J t^T J)(u J)^T with J the exchange permutation, so one
  // factorization of a serves both coefficients.
  const auto fa = triangular_form(a);
  TriangularForm<Real> fb{fa.u.rowwise().reverse(), fa.t.transpose().reverse()};
  const Real norm_a = frobenius_norm(a);
  return symmetrized<Real>(sylvester_from_forms(fa, fb, c, singularity_threshold(norm_a, norm_a)));
}

template <typename Real>
Real sylvester_residual(const Matrix<Real>& a, const Matrix<Real>& b, const Matrix<Real>& c,
                        const Matrix<Real>& x) {
  const Real r = frobenius_norm<Real>(a * x + x * b - c);
  const Real scale = (frobenius_norm(a) + frobenius_norm(b)) * frobenius_norm(x);
  if (scale == Real(0)) return r == Real(0) ? Real(0) : std::numeric_limits<Real>::infinity();
  return r / scale;
}

template <typename Real>
Real min_symmetric_eigenvalue(const Matrix<Real>& m) {
  require_square(m, "min_symmetric_eigenvalue");
  if (m.size() == 0) return Real(0);
  Eigen::SelfAdjointEigenSolver<Matrix<Real>> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

#define STOCHDISC_INSTANTIATE(Real)                                                            \
  template void require_finite<Real>(const Matrix<Real>&, std::string_view);                   \
  template void require_square<Real>(const Matrix<Real>&, std::string_view);                   \
  template Real spectral_norm<Real>(const Matrix<Real>&);                                      \
  template Matrix<Real> mat_exp<Real>(const Matrix<Real>&, Real);                              \
  template SchurPair<Real> real_schur<Real>(const Matrix<Real>&, int);                         \
  template Real default_tau_zero<Real>(Index, Real, Index);                                    \
  template OrderedSchur<Real> order_schur_zeros_last<Real>(const Matrix<Real>&,                \
                                                           const Matrix<Real>&,                \
                                                           std::optional<Real>);               \
  template bool is_quasi_upper_triangular<Real>(const Matrix<Real>&);                          \
  template std::vector<std::complex<Real>> quasi_triangular_eigenvalues<Real>(                 \
      const Matrix<Real>&);                                                                    \
  template std::vector<std::complex<Real>> eigenvalues<Real>(const Matrix<Real>&);             \
  template Real singularity_threshold<Real>(Real, Real);                                       \
  template Matrix<Real> solve_sylvester<Real>(const Matrix<Real>&, const Matrix<Real>&,        \
                                              const Matrix<Real>&);                            \
  template Matrix<Real> solve_lyapunov<Real>(const Matrix<Real>&, const Matrix<Real>&);        \
  template Real sylvester_residual<Real>(const Matrix<Real>&, const Matrix<Real>&,             \
                                         const Matrix<Real>&, const Matrix<Real>&);            \
  template Real min_symmetric_eigenvalue<Real>(const Matrix<Real>&);

STOCHDISC_INSTANTIATE(float)
STOCHDISC_INSTANTIATE(double)

#undef STOCHDISC_INSTANTIATE

}  // namespace stochdisc::linalg
