#include "stochdisc/modelgen.hpp"

#include <cmath>
#include <sstream>

#include "stochdisc/errors.hpp"

namespace stochdisc::modelgen {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Matrix<double> normal_matrix(Rng& rng, Index rows, Index cols) {
  Matrix<double> g(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) g(r, c) = rng.normal();
  }
  return g;
}

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
// of diag(R) folded into Q.
Matrix<double> random_orthogonal(Rng& rng, Index n) {
  const Matrix<double> g = normal_matrix(rng, n, n);
  Eigen::HouseholderQR<Matrix<double>> qr(g);
  Matrix<double> q = qr.householderQ() * Matrix<double>::Identity(n, n);
  const Matrix<double> r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return q;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(seed ^ splitmix64(stream ^ 0x5851f42d4c957f2dULL))) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

void EnsembleSpec::validate() const {
  std::ostringstream os;
  if (m < 0 || p < 0) os << "m and p must be >= 0; ";
  if (n != m + p) os << "n must equal m + p; ";
  if (n < 1) os << "n must be >= 1; ";
  if (!(pole_real_min <= pole_real_max) || !(pole_real_max < 0.0)) {
    os << "pole_real_range must be a non-empty interval inside (-inf, 0); ";
  }
  if (!std::isfinite(coupling_scale) || coupling_scale < 0.0) {
    os << "coupling_scale must be finite and >= 0; ";
  }
  if (!os.str().empty()) {
    throw Error(ErrorKind::precondition, "invalid ensemble spec: " + os.str());
  }
}

ContinuousModel<double> gen_random_system(const EnsembleSpec& spec, std::uint64_t system_index) {
  spec.validate();
  Rng rng(spec.seed, system_index);
  const Index n = spec.n;
  const Index m = spec.m;
  const Index p = spec.p;

  // Stable core: 1x1 real poles and 2x2 [[re, im], [-im, re]] blocks.
  Matrix<double> block = Matrix<double>::Zero(n, n);
  double fastest = 0.0;
  for (Index i = 0; i < m;) {
    const double re = rng.uniform(spec.pole_real_min, spec.pole_real_max);
    fastest = std::max(fastest, std::abs(re));
    if (m - i >= 2 && rng.uniform() < 0.5) {
      const double im = rng.uniform(0.05, 1.0);
      block(i, i) = re;
      block(i + 1, i + 1) = re;
      block(i, i + 1) = im;
      block(i + 1, i) = -im;
      i += 2;
    } else {
      block(i, i) = re;
      i += 1;
    }
  }
  for (Index i = m; i + 1 < n; ++i) block(i, i + 1) = 1.0;  // integrator chain
  if (m > 0 && p > 0) {
    block.topRightCorner(m, p) = spec.coupling_scale * normal_matrix(rng, m, p);
  }
  if (fastest > 0.0) block /= fastest;

  const Matrix<double> q = random_orthogonal(rng, n);
  Matrix<double> a = q * block * q.transpose();

  const Matrix<double> g = normal_matrix(rng, n, n);
  Matrix<double> s = g * g.transpose();
  s /= linalg::spectral_norm(s);
  return ContinuousModel<double>(std::move(a), linalg::symmetrized<double>(s));
}

template <typename Real>
ContinuousModel<Real> constant_velocity() {
  Matrix<Real> a(2, 2);
  a << 0, 1, 0, 0;
  Matrix<Real> s(2, 2);
  s << 0, 0, 0, 1;
  return ContinuousModel<Real>(a, s);
}

template ContinuousModel<float> constant_velocity<float>();
template ContinuousModel<double> constant_velocity<double>();

ObserverCanonical observer_canonical_realization(std::span<const double> a_coeffs,
                                                 std::span<const double> b_coeffs, Index p) {
  const auto m = static_cast<Index>(a_coeffs.size());
  if (m < 1) {
    throw Error(ErrorKind::precondition, "observer_canonical: at least one non-zero pole required");
  }
  if (static_cast<Index>(b_coeffs.size()) != m) {
    throw Error(ErrorKind::precondition,
                "observer_canonical: a and b coefficient lists must have the same length");
  }
  if (p < 0) throw Error(ErrorKind::precondition, "observer_canonical: p must be >= 0");
  if (a_coeffs.back() == 0.0) {
    throw Error(ErrorKind::precondition,
                "observer_canonical: a_m = 0 puts a pole at the origin; count it in p instead");
  }
  const Index n = m + p;
  ObserverCanonical out{Matrix<double>::Zero(n, n), Matrix<double>::Zero(n, 1),
                        Matrix<double>::Zero(1, n)};
  for (Index i = 0; i < m; ++i) out.a(i, 0) = -a_coeffs[static_cast<std::size_t>(i)];
  for (Index i = 0; i + 1 < n; ++i) out.a(i, i + 1) = 1.0;
  for (Index i = 0; i < m; ++i) out.b(p + i, 0) = b_coeffs[static_cast<std::size_t>(i)];
  out.c(0, 0) = 1.0;
  return out;
}

ContinuousModel<double> observer_canonical(std::span<const double> a_coeffs,
                                           std::span<const double> b_coeffs, Index p) {
  auto r = observer_canonical_realization(a_coeffs, b_coeffs, p);
  return ContinuousModel<double>(std::move(r.a), r.b * r.b.transpose());
}

}  // namespace stochdisc::modelgen
