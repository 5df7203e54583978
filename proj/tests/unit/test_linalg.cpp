#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "stochdisc/errors.hpp"
#include "stochdisc/linalg.hpp"

using namespace stochdisc;
using namespace stochdisc::linalg;
using Mat = Matrix<double>;

namespace {

Mat random_matrix(std::mt19937_64& rng, Index r, Index c) {
  std::normal_distribution<double> nd;
  Mat m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

Mat random_orthogonal(std::mt19937_64& rng, Index n) {
  Eigen::HouseholderQR<Mat> qr(random_matrix(rng, n, n));
  return qr.householderQ() * Mat::Identity(n, n);
}

// Taylor series with many terms in long double; only for small ||a t||.
Mat taylor_exp(const Mat& a, double t) {
  using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const LMat at = a.cast<long double>() * static_cast<long double>(t);
  LMat term = LMat::Identity(a.rows(), a.cols());
  LMat sum = term;
  for (int k = 1; k < 60; ++k) {
    term = (term * at / static_cast<long double>(k)).eval();
    sum += term;
  }
  return sum.cast<double>();
}

Mat from_blocks(std::mt19937_64& rng, const std::vector<std::pair<double, double>>& poles,
                Index zeros) {
  // real poles (re, 0) or pairs (re, im); zero eigenvalues as one Jordan chain
  Index n = zeros;
  for (auto [re, im] : poles) n += im == 0 ? 1 : 2;
  Mat b = Mat::Zero(n, n);
  Index i = 0;
  for (auto [re, im] : poles) {
    if (im == 0) {
      b(i, i) = re;
      ++i;
    } else {
      b(i, i) = b(i + 1, i + 1) = re;
      b(i, i + 1) = im;
      b(i + 1, i) = -im;
      i += 2;
    }
  }
  for (Index j = i; j + 1 < n; ++j) b(j, j + 1) = 1.0;
  b.topRightCorner(i, zeros) = random_matrix(rng, i, zeros);
  const Mat q = random_orthogonal(rng, n);
  return q * b * q.transpose();
}

}  // namespace

TEST(MatExp, ZeroTimeIsIdentity) {
  std::mt19937_64 rng(1);
  const Mat a = random_matrix(rng, 4, 4);
  EXPECT_EQ(mat_exp(a, 0.0), Mat::Identity(4, 4));
}

TEST(MatExp, NilpotentSeriesTerminates) {
  Mat a(2, 2);
  a << 0, 1, 0, 0;
  for (double t : {0.5, 3.0, 40.0}) {
    Mat want(2, 2);
    want << 1, t, 0, 1;
    EXPECT_LE((mat_exp(a, t) - want).norm(), 1e-15 * want.norm()) << "t=" << t;
  }
}

TEST(MatExp, Scalar) {
  const Mat a = Mat::Constant(1, 1, -1.0);
  EXPECT_NEAR(mat_exp(a, 1.0)(0, 0), 0.36787944117144233, 1e-16);
  EXPECT_NEAR(mat_exp(a, -2.0)(0, 0), std::exp(2.0), 1e-15 * std::exp(2.0));
}

TEST(MatExp, MatchesTaylorOnSmallNorms) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat a = random_matrix(rng, 5, 5) * 0.3;
    for (double t : {0.01, 0.3, 1.0, 2.0}) {
      const Mat want = taylor_exp(a, t);
      EXPECT_LE((mat_exp(a, t) - want).norm(), 1e-13 * want.norm());
    }
  }
}

TEST(MatExp, FloatWidthAccuracy) {
  std::mt19937_64 rng(8);
  const Mat a = random_matrix(rng, 4, 4) * 0.5;
  const Mat want = taylor_exp(a, 1.5);
  const Matrix<float> got = mat_exp<float>(a.cast<float>(), 1.5f);
  EXPECT_LE((got.cast<double>() - want).norm(), 1e-5 * want.norm());
}

TEST(MatExp, Semigroup) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(0.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    Mat a = random_matrix(rng, 5, 5);
    const double s = ud(rng), t = ud(rng);
    a *= 20.0 / (a.norm() * (s + t));  // ||A|| (s + t) <= 20
    const Mat whole = mat_exp(a, s + t);
    EXPECT_LE((whole - mat_exp(a, s) * mat_exp(a, t)).norm(), 1e-10 * whole.norm());
  }
}

TEST(MatExp, DerivativeIsSecondOrder) {
  std::mt19937_64 rng(12);
  const Mat a = random_matrix(rng, 4, 4) * 0.5;
  const double t = 0.8;
  auto err = [&](double h) {
    const Mat d = (mat_exp(a, t + h) - mat_exp(a, t - h)) / (2 * h);
    return (d - a * mat_exp(a, t)).norm();
  };
  const double e1 = err(1e-2), e2 = err(5e-3);
  EXPECT_NEAR(e1 / e2, 4.0, 0.4);
}

TEST(MatExp, CommutesWithA) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat a = random_matrix(rng, 6, 6);
    const Mat e = mat_exp(a, 0.7);
    EXPECT_LE((a * e - e * a).norm(), 1e-12 * a.norm() * e.norm());
  }
}

TEST(MatExp, Errors) {
  EXPECT_THROW(mat_exp<double>(Mat::Zero(2, 3), 1.0), Error);
  Mat big = Mat::Identity(2, 2) * 1e3;
  try {
    mat_exp(big, 10.0);
    FAIL() << "expected overflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::overflow);
  }
  Mat nan = Mat::Zero(2, 2);
  nan(0, 0) = std::nan("");
  try {
    mat_exp(nan, 1.0);
    FAIL() << "expected non_finite";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::non_finite);
  }
}

TEST(SpectralNorm, Examples) {
  EXPECT_EQ(spectral_norm<double>(Mat::Zero(3, 3)), 0.0);
  Mat d(2, 2);
  d << 3, 0, 0, -5;
  EXPECT_NEAR(spectral_norm(d), 5.0, 1e-14);
  Mat n(2, 2);
  n << 0, 2, 0, 0;
  EXPECT_NEAR(spectral_norm(n), 2.0, 1e-14);
}

TEST(SpectralNorm, MatchesLargestEigenvalueOfGram) {
  std::mt19937_64 rng(14);
  const Mat m = random_matrix(rng, 5, 3);
  Eigen::SelfAdjointEigenSolver<Mat> es(m.transpose() * m);
  EXPECT_NEAR(spectral_norm(m), std::sqrt(es.eigenvalues().maxCoeff()), 1e-12);
}

TEST(RealSchur, DiagonalInput) {
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = 3;
  a(1, 1) = 1;
  const auto s = real_schur(a);
  EXPECT_TRUE(is_quasi_upper_triangular(s.t));
  std::vector<double> d{s.t(0, 0), s.t(1, 1)};
  std::sort(d.begin(), d.end());
  EXPECT_NEAR(d[0], 1.0, 1e-15);
  EXPECT_NEAR(d[1], 3.0, 1e-15);
}

TEST(RealSchur, NilpotentGivesZeroDiagonal) {
  Mat a(2, 2);
  a << 0, 1, 0, 0;
  const auto s = real_schur(a);
  EXPECT_EQ(s.t(1, 0), 0.0);
  EXPECT_NEAR(s.t(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(s.t(1, 1), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.t(0, 1)), 1.0, 1e-15);
}

TEST(RealSchur, RandomReconstruction) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat a = random_matrix(rng, 6, 6);
    const auto s = real_schur(a);
    EXPECT_TRUE(is_quasi_upper_triangular(s.t));
    EXPECT_LE((s.u * s.t * s.u.transpose() - a).norm() / a.norm(), 1e-13);
    EXPECT_LE((s.u.transpose() * s.u - Mat::Identity(6, 6)).norm(), 1e-13);
  }
}

TEST(OrderSchur, ZeroAlreadyLast) {
  Mat t = Mat::Zero(2, 2);
  t(0, 0) = -1;
  const auto o = order_schur_zeros_last<double>(Mat::Identity(2, 2), t);
  EXPECT_EQ(o.split, 1);
  EXPECT_EQ(o.t(1, 1), 0.0);
}

TEST(OrderSchur, ForcedSwap) {
  Mat t = Mat::Zero(2, 2);
  t(1, 1) = -1;
  const auto o = order_schur_zeros_last<double>(Mat::Identity(2, 2), t);
  EXPECT_EQ(o.split, 1);
  EXPECT_NEAR(o.t(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(o.t(1, 1), 0.0, 1e-15);
  EXPECT_LE((o.u * o.t * o.u.transpose() - t).norm(), 1e-15);
}

TEST(OrderSchur, MixedSpectrumClassification) {
  std::mt19937_64 rng(16);
  const Mat a = from_blocks(rng, {{-1, 0}, {-2, 1}, {-0.5, 0}}, 2);
  const auto s = real_schur(a);
  const auto o = order_schur_zeros_last(s.u, s.t);
  EXPECT_EQ(o.split, 4);
  EXPECT_EQ(o.integrators(), 2);
  const Mat a22 = o.t.bottomRightCorner(2, 2);
  EXPECT_LE((a22 * a22).norm(), 1e-6);
  EXPECT_TRUE((o.t.bottomLeftCorner(2, 4).array() == 0).all());
}

TEST(OrderSchur, ExplicitThreshold) {
  Mat t = Mat::Zero(3, 3);
  t(0, 0) = 1e-3;
  t(1, 1) = -1;
  t(2, 2) = -2;
  const auto loose = order_schur_zeros_last<double>(Mat::Identity(3, 3), t, 1e-2);
  EXPECT_EQ(loose.split, 2);
  const auto tight = order_schur_zeros_last<double>(Mat::Identity(3, 3), t);
  EXPECT_EQ(tight.split, 3);
}

TEST(OrderSchur, RejectsNonSchurInput) {
  Mat t = Mat::Ones(3, 3);
  EXPECT_THROW(order_schur_zeros_last<double>(Mat::Identity(3, 3), t), Error);
}

// 100 random 6x6 matrices with a known number of integrators (0..3): the
// ordered pair keeps every structural invariant.
TEST(OrderSchur, InvariantsOnRandomMatrices) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> re(-2.0, -0.1), im(0.1, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const Index zeros = trial % 4;
    std::vector<std::pair<double, double>> poles;
    Index used = zeros;
    while (used < 6) {
      if (6 - used >= 2 && trial % 3 == 0) {
        poles.emplace_back(re(rng), im(rng));
        used += 2;
      } else {
        poles.emplace_back(re(rng), 0.0);
        used += 1;
      }
    }
    const Mat a = from_blocks(rng, poles, zeros);
    const auto s = real_schur(a);
    const auto o = order_schur_zeros_last(s.u, s.t);
    SCOPED_TRACE("trial " + std::to_string(trial));
    EXPECT_EQ(o.integrators(), zeros);
    EXPECT_LE((o.u.transpose() * o.u - Mat::Identity(6, 6)).norm(), 1e-12 * 6);
    EXPECT_LE((o.u * o.t * o.u.transpose() - a).norm(), 1e-12 * a.norm());
    EXPECT_TRUE(is_quasi_upper_triangular(o.t));
    EXPECT_TRUE((o.t.bottomLeftCorner(zeros, o.split).array() == 0).all());
    for (const auto& z : quasi_triangular_eigenvalues<double>(o.t.topLeftCorner(o.split, o.split))) {
      EXPECT_GT(std::abs(z), o.tau_zero);
    }
    for (const auto& z :
         quasi_triangular_eigenvalues<double>(o.t.bottomRightCorner(zeros, zeros))) {
      EXPECT_LE(std::abs(z), o.tau_zero);
    }
  }
}

TEST(OrderSchur, FloatWidthFindsChain) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat a = from_blocks(rng, {{-1, 0}, {-0.3, 0.7}, {-0.2, 0}}, 2);
    const Matrix<float> af = a.cast<float>();
    const auto s = real_schur(af);
    const auto o = order_schur_zeros_last(s.u, s.t);
    EXPECT_EQ(o.integrators(), 2) << "trial " << trial;
  }
}

TEST(DefaultTauZero, SingleClusterIsLinearInEps) {
  EXPECT_DOUBLE_EQ(default_tau_zero<double>(6, 2.0, 1), 100 * 6 * machine_epsilon<double>() * 2.0);
  EXPECT_GT(default_tau_zero<double>(6, 2.0, 2), default_tau_zero<double>(6, 2.0, 1));
}

TEST(Sylvester, ScalarExample) {
  const Mat x = solve_sylvester<double>(Mat::Constant(1, 1, -1), Mat::Constant(1, 1, -1),
                                        Mat::Constant(1, 1, 2));
  EXPECT_NEAR(x(0, 0), -1.0, 1e-15);
}

TEST(Sylvester, DiagonalExample) {
  Mat a(2, 2), b(1, 1), c(2, 1), want(2, 1);
  a << -1, 0, 0, -2;
  b << -3;
  c << 4, 10;
  want << -1, -2;
  EXPECT_LE((solve_sylvester(a, b, c) - want).norm(), 1e-15);
}

TEST(Sylvester, SingularRaisesWithEigenvalues) {
  try {
    solve_sylvester<double>(Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Ones(1, 1));
    FAIL() << "expected NearSingularError";
  } catch (const NearSingularError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::near_singular);
    EXPECT_EQ(e.lambda_a(), std::complex<double>(0.0));
    EXPECT_EQ(e.lambda_b(), std::complex<double>(0.0));
  }
}

TEST(Sylvester, MirroredEigenvaluesAreSingular) {
  Mat a = Mat::Constant(1, 1, 2.0), b = Mat::Constant(1, 1, -2.0);
  EXPECT_THROW(solve_sylvester<double>(a, b, Mat::Ones(1, 1)), NearSingularError);
}

TEST(Sylvester, RandomResidualBound) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> shift(0.6, 2.0);
  int solved = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index p = 1 + trial % 5, q = 1 + (trial / 5) % 4;
    // eigenvalues of a and b both in the left half plane => gap >= 0.1
    Mat a = random_matrix(rng, p, p) * 0.3 - shift(rng) * Mat::Identity(p, p);
    Mat b = random_matrix(rng, q, q) * 0.3 - shift(rng) * Mat::Identity(q, q);
    double gap = 1e300;
    for (auto la : eigenvalues(a)) {
      for (auto lb : eigenvalues(b)) gap = std::min(gap, std::abs(la + lb));
    }
    if (gap < 0.1) continue;
    const Mat c = random_matrix(rng, p, q);
    const Mat x = solve_sylvester(a, b, c);
    EXPECT_LE((a * x + x * b - c).norm(), 1e-12 * (a.norm() + b.norm()) * x.norm());
    ++solved;
  }
  EXPECT_GE(solved, 90);
}

TEST(Sylvester, QuasiTriangularInputsSkipFactorization) {
  // (lower quasi-triangular b exercises the exchange-permutation path)
  std::mt19937_64 rng(20);
  Mat a(3, 3);
  a << -1, 0.5, 2, -0.4, -1, 1, 0, 0, -3;
  Mat b = Mat(a.transpose());
  const Mat c = random_matrix(rng, 3, 3);
  const Mat x = solve_sylvester(a, b, c);
  EXPECT_LE((a * x + x * b - c).norm(), 1e-13 * c.norm());
}

TEST(Sylvester, FloatWidth) {
  std::mt19937_64 rng(21);
  const Mat a = random_matrix(rng, 4, 4) * 0.2 - Mat::Identity(4, 4);
  const Mat c = random_matrix(rng, 4, 4);
  const Matrix<float> x = solve_sylvester<float>(a.cast<float>(), a.transpose().cast<float>(),
                                                 c.cast<float>());
  const Mat xd = solve_sylvester<double>(a, a.transpose(), c);
  EXPECT_LE((x.cast<double>() - xd).norm(), 1e-5 * xd.norm());
}

TEST(Lyapunov, Examples) {
  const Mat x1 = solve_lyapunov<double>(Mat::Constant(1, 1, -1), Mat::Constant(1, 1, -2));
  EXPECT_NEAR(x1(0, 0), 1.0, 1e-15);

  Mat a(2, 2);
  a << -1, 0, 0, -3;
  const Mat x2 = solve_lyapunov<double>(a, -Mat::Identity(2, 2));
  EXPECT_NEAR(x2(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(x2(1, 1), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(x2(0, 1), 0.0, 1e-15);
}

TEST(Lyapunov, ZeroEigenvalueIsSingular) {
  Mat a(2, 2);
  a << -1, 1, 0, 0;
  EXPECT_THROW(solve_lyapunov<double>(a, -Mat::Identity(2, 2)), NearSingularError);
}

TEST(Lyapunov, StableGivesSymmetricPsd) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const Mat a = random_matrix(rng, 5, 5) * 0.3 - 1.2 * Mat::Identity(5, 5);
    const Mat g = random_matrix(rng, 5, 3);
    const Mat s = g * g.transpose();
    const Mat x = solve_lyapunov<double>(a, -s);
    EXPECT_EQ(x, Mat(x.transpose()));
    EXPECT_GE(min_symmetric_eigenvalue(x), -1e-12 * x.norm());
    EXPECT_LE(sylvester_residual<double>(a, a.transpose(), -s, x), 1e-13);
  }
}

TEST(Eigenvalues, QuasiTriangularPairs) {
  Mat t(3, 3);
  t << -1, 2, 5, -0.5, -1, 1, 0, 0, 4;
  auto ev = quasi_triangular_eigenvalues(t);
  ASSERT_EQ(ev.size(), 3u);
  std::sort(ev.begin(), ev.end(), [](auto x, auto y) { return x.imag() < y.imag(); });
  EXPECT_NEAR(ev[0].real(), -1.0, 1e-14);
  EXPECT_NEAR(ev[0].imag(), -1.0, 1e-14);
  EXPECT_NEAR(ev[1].real(), 4.0, 1e-14);
  EXPECT_NEAR(ev[2].imag(), 1.0, 1e-14);
}
