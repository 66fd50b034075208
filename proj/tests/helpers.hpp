// Shared helpers for the test binaries: deterministic random matrices and a
// few small oracles.
#ifndef MIMOSWITCH_TESTS_HELPERS_HPP
#define MIMOSWITCH_TESTS_HELPERS_HPP

#include <cstdint>

#include "mimoswitch/model.hpp"
#include "mimoswitch/numerics.hpp"

namespace testing {

using namespace mimoswitch;

inline CMatrix random_cmatrix(int n, std::uint64_t seed) {
  CscgSampler rng(seed);
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.next();
  return m;
}

inline CVector random_cvector(int n, std::uint64_t seed) {
  CscgSampler rng(seed);
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.next();
  return v;
}

inline CMatrix random_hermitian(int n, std::uint64_t seed) {
  CMatrix m = random_cmatrix(n, seed);
  return ((m + m.adjoint()) / 2.0).eval();
}

// Hermitian positive definite with smallest eigenvalue >= ridge.
inline CMatrix random_hpd(int n, std::uint64_t seed, double ridge = 0.1) {
  CMatrix m = random_cmatrix(n, seed);
  return (m * m.adjoint() + ridge * CMatrix::Identity(n, n)).eval();
}

inline ChannelRealization random_channel(int n, std::uint64_t seed) {
  return sample_channel(n, seed);
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace testing

#endif
