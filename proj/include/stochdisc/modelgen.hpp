#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "stochdisc/discretize.hpp"

namespace stochdisc::modelgen {

/// Random ensemble of n = m + p state systems: m stable poles (real or
/// complex-conjugate pairs) and a chain of p integrators, coupled through a
/// random A12 block and hidden by a random orthogonal similarity.
struct EnsembleSpec {
  Index n = 6;
  Index m = 4;
  Index p = 2;
  std::uint64_t seed = 1;
  double pole_real_min = -1.0;   // Re(lambda) range before normalization
  double pole_real_max = -0.05;
  double coupling_scale = 1.0;   // magnitude of the A12 entries

  /// Throws ErrorKind::precondition on an inconsistent spec.
  void validate() const;
};

/// Deterministic in (spec, system_index): each index draws from its own
/// stream, so systems can be generated in any order. A is rescaled so the
/// fastest pole has |Re(lambda)| = 1; S = G G^T with ||S||_2 = 1.
ContinuousModel<double> gen_random_system(const EnsembleSpec& spec,
                                          std::uint64_t system_index = 0);

/// dx = [[0, 1], [0, 0]] x dt + [0, 1]^T dq with unit-intensity q.
template <typename Real>
ContinuousModel<Real> constant_velocity();

/// Observer canonical form of
///   G(s) = (b_1 s^{m-1} + ... + b_m) / (s^m + a_1 s^{m-1} + ... + a_m) * 1 / s^p.
struct ObserverCanonical {
  Matrix<double> a;  // n x n, block triangular with the integrator chain last
  Matrix<double> b;  // n x 1, b coefficients in the last m rows
  Matrix<double> c;  // 1 x n, [1 0 ... 0]
};

/// Throws ErrorKind::precondition when a_m == 0 (a pole at the origin belongs
/// in p) or when the coefficient lists are empty or of unequal length.
ObserverCanonical observer_canonical_realization(std::span<const double> a_coeffs,
                                                 std::span<const double> b_coeffs, Index p);

/// (A, S = B B^T) of the observer canonical realization.
ContinuousModel<double> observer_canonical(std::span<const double> a_coeffs,
                                           std::span<const double> b_coeffs, Index p);

/// std::mt19937_64 seeded per (seed, stream) through splitmix64. The engine's
/// output is fixed by the standard; the std:: distributions are not, so the
/// uniform/normal transforms are done here.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Marsaglia polar method).
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace stochdisc::modelgen
