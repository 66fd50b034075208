#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "mimoswitch/model.hpp"

using namespace mimoswitch;
using testing::random_cvector;

namespace {

ChannelRealization diag_channel(double d0, double d1) {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = d0;
  h(1, 1) = d1;
  return ChannelRealization::from_matrix(h);
}

}  // namespace

TEST_CASE("SwitchSpec: permutation and pairing detection") {
  auto sw = SwitchSpec::pairwise(4);
  CHECK(sw.size() == 4);
  REQUIRE(sw.pairs.has_value());
  CHECK(sw.pairs->size() == 2);
  // (Px)_0 = x_3 for the symmetric pairing of 4 stations.
  CHECK(sw.P(0, 3) == doctest::Approx(1.0));
  CHECK(sw.P(3, 0) == doctest::Approx(1.0));

  auto np4 = SwitchSpec::non_pairwise4();
  CHECK_FALSE(np4.pairs.has_value());
  // 0 <- 2: station 0 receives station 2's symbol.
  CHECK(np4.P(0, 2) == doctest::Approx(1.0));
  // Derangement: zero diagonal, doubly stochastic 0/1.
  CHECK(np4.P.diagonal().cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((np4.P.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-15);

  auto swp = SwitchSpec::from_permutation({1, 0, 3, 2}, true);
  CHECK(swp.pnc);
  REQUIRE(swp.pairs.has_value());
  CHECK(swp.pairs->size() == 2);
}

TEST_CASE("sample_channel: deterministic per seed, distinct across seeds") {
  auto a = sample_channel(4, 42);
  auto b = sample_channel(4, 42);
  auto c = sample_channel(4, 43);
  CHECK((a.H - b.H).norm() == 0.0);
  CHECK((a.H - c.H).norm() > 1e-3);
  // Cached algebra is consistent.
  CHECK((a.H * a.Hinv - CMatrix::Identity(4, 4)).norm() < 1e-10);
  CHECK((a.W - invert((a.H.adjoint() * a.H).eval())).norm() < 1e-10);
  CHECK((a.Wstar - a.W.conjugate()).norm() < 1e-12);
}

TEST_CASE("CscgSampler: unit variance by the law of large numbers") {
  CscgSampler rng(7);
  const int n = 100000;
  double sum = 0.0, mean_re = 0.0;
  for (int i = 0; i < n; ++i) {
    Complex z = rng.next();
    sum += std::norm(z);
    mean_re += z.real();
  }
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(mean_re / n) < 0.02);
}

TEST_CASE("compute_Q / compute_S: worked diagonal cases") {
  NoiseParams np{0.1, 0.1, 1.0};
  auto sw = SwitchSpec::pairwise(2);

  // H = I: W = I, Q = 1.1 I, S = 1.1 I.
  auto chi = diag_channel(1.0, 1.0);
  CMatrix q = compute_Q(chi, sw, np);
  CMatrix s = compute_S(chi, sw, np);
  CHECK((q - 1.1 * CMatrix::Identity(2, 2)).norm() < 1e-12);
  CHECK((s - 1.1 * CMatrix::Identity(2, 2)).norm() < 1e-12);

  // H = diag(1, 2): W = diag(1, 1/4), Q = diag(1.025, 1.1),
  // S = diag(1.025, 0.275).
  auto chd = diag_channel(1.0, 2.0);
  q = compute_Q(chd, sw, np);
  s = compute_S(chd, sw, np);
  CHECK(std::abs(q(0, 0) - Complex(1.025)) < 1e-12);
  CHECK(std::abs(q(1, 1) - Complex(1.1)) < 1e-12);
  CHECK(std::abs(s(0, 0) - Complex(1.025)) < 1e-12);
  CHECK(std::abs(s(1, 1) - Complex(0.275)) < 1e-12);
  CHECK(std::abs(s(0, 1)) < 1e-12);
}

TEST_CASE("compute_R: reduces to Q at b = 0 and has unit-plus diagonal") {
  NoiseParams np{0.2, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto ch = sample_channel(4, seed);
    auto sw = SwitchSpec::pairwise(4, true);
    CVector zero = CVector::Zero(4);
    CHECK((compute_R(ch, sw, np, zero) - compute_Q(ch, sw, np)).norm() <
          1e-12);
    CVector b = random_cvector(4, seed + 100);
    CMatrix r = compute_R(ch, sw, np, b);
    CHECK(is_hermitian(r, 1e-10));
    for (int i = 0; i < 4; ++i) CHECK(r(i, i).real() >= 1.0 - 1e-12);
  }
}

TEST_CASE("compute_power_matrix: b = 0 reduction and quadratic consistency") {
  NoiseParams np{0.15, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto ch = sample_channel(4, seed);
    auto sw = SwitchSpec::pairwise(4, true);
    CVector zero = CVector::Zero(4);
    CHECK((compute_power_matrix(ch, sw, np, zero) - compute_S(ch, sw, np))
              .norm() < 1e-12);

    CVector a = random_cvector(4, seed + 50);
    CVector b = random_cvector(4, seed + 60);
    CMatrix sp = compute_power_matrix(ch, sw, np, b);
    double quad = (a.adjoint() * sp * a).value().real();
    CHECK(quad == doctest::Approx(relay_power(ch, sw, np, a, b))
                      .epsilon(1e-9));
  }
}

TEST_CASE("relay_power: worked case and quadratic homogeneity") {
  NoiseParams np{0.1, 0.1, 1.0};
  auto sw = SwitchSpec::pairwise(2);
  auto ch = diag_channel(1.0, 1.0);
  CVector a(2);
  a << 1.0 / std::sqrt(2.2), -1.0 / std::sqrt(2.2);
  CVector b = CVector::Zero(2);
  CHECK(relay_power(ch, sw, np, a, b) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(relay_power(ch, sw, np, (2.0 * a).eval(), b) ==
        doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("assemble_precoder: H^T G H = A (P + B)") {
  NoiseParams np{0.1, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    int n = seed % 2 ? 2 : 4;
    auto ch = sample_channel(n, seed);
    auto sw = seed % 3 ? SwitchSpec::pairwise(n, true)
                       : (n == 4 ? SwitchSpec::non_pairwise4(true)
                                 : SwitchSpec::pairwise(2, true));
    CVector a = random_cvector(n, seed + 7);
    CVector b = seed % 2 ? random_cvector(n, seed + 9)
                         : CVector::Zero(n);
    CMatrix g = assemble_precoder(ch, sw, a, b);
    CMatrix target = a.asDiagonal() *
                     (sw.P.cast<Complex>() + CMatrix(b.asDiagonal()));
    CHECK((ch.H.transpose() * g * ch.H - target).norm() / target.norm() <
          1e-10);
  }
}

TEST_CASE("post_noise: worked case and zero-relay-noise limit") {
  auto sw = SwitchSpec::pairwise(2);
  auto ch = diag_channel(1.0, 1.0);
  CVector a(2);
  a << 1.0 / std::sqrt(2.2), -1.0 / std::sqrt(2.2);
  CVector b = CVector::Zero(2);

  NoiseParams np{0.1, 0.1, 1.0};
  RVector eps = post_noise(ch, sw, np, a, b);
  CHECK(eps(0) == doctest::Approx(0.32).epsilon(1e-12));
  CHECK(eps(1) == doctest::Approx(0.32).epsilon(1e-12));

  // gamma^2 = 0: eps_i = sigma^2 / |a_i|^2.
  NoiseParams np0{0.0, 0.1, 1.0};
  auto chr = sample_channel(3, 5);
  auto sw3 = SwitchSpec::from_permutation({1, 2, 0});
  CVector ar = random_cvector(3, 8);
  RVector eps0 = post_noise(chr, sw3, np0, ar, CVector::Zero(3));
  for (int i = 0; i < 3; ++i)
    CHECK(eps0(i) == doctest::Approx(0.1 / std::norm(ar(i))).epsilon(1e-12));
}

TEST_CASE("throughput: reference values") {
  CHECK(throughput(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(throughput(0.32) ==
        doctest::Approx(0.5 * std::log2(1.0 + 1.0 / 0.32)).epsilon(1e-15));
}

TEST_CASE("make_outcome: fields are mutually consistent") {
  NoiseParams np{0.1, 0.05, 1.0};
  auto ch = sample_channel(4, 17);
  auto sw = SwitchSpec::pairwise(4, true);
  CVector a = random_cvector(4, 21);
  CVector b = random_cvector(4, 22);
  auto out = make_outcome(ch, sw, np, a, b);
  CHECK((out.epsilon - post_noise(ch, sw, np, a, b)).norm() < 1e-12);
  CHECK(out.power_used ==
        doctest::Approx(relay_power(ch, sw, np, a, b)).epsilon(1e-12));
  for (int i = 0; i < 4; ++i)
    CHECK(out.throughput(i) ==
          doctest::Approx(throughput(out.epsilon(i))).epsilon(1e-12));
  CHECK(out.min_throughput() == doctest::Approx(throughput(out.max_epsilon()))
                                    .epsilon(1e-12));
}

TEST_CASE("simulate_round: exact in the noise-free limit") {
  NoiseParams np{0.0, 0.0, 1.0};
  auto ch = sample_channel(2, 3);
  auto sw = SwitchSpec::pairwise(2);
  CVector a(2);
  a << 0.8, -0.6;
  CVector b = CVector::Zero(2);
  RelayDesign design{a, b, assemble_precoder(ch, sw, a, b)};
  auto stats = simulate_round(ch, sw, np, design, 2000, 99);
  CHECK(stats.empirical_noise.maxCoeff() < 1e-20);
}

TEST_CASE("simulate_round: empirical noise matches analytic eps") {
  NoiseParams np{0.1, 0.1, 1.0};
  auto ch = sample_channel(2, 12);
  auto sw = SwitchSpec::pairwise(2);
  CVector a(2);
  a << 0.7, Complex(-0.3, 0.4);
  auto out = make_outcome(ch, sw, np, a, CVector::Zero(2));
  auto stats = simulate_round(ch, sw, np, out.design, 200000, 5);
  for (int i = 0; i < 2; ++i) {
    // 3-sigma band: the per-symbol residual power has variance ~ eps^2.
    double tol = 3.0 * out.epsilon(i) * std::sqrt(2.0 / 200000.0);
    CHECK(std::abs(stats.empirical_noise(i) - out.epsilon(i)) < tol + 1e-9);
  }
  CHECK(stats.empirical_relay_power ==
        doctest::Approx(out.power_used).epsilon(0.05));
}

TEST_CASE("simulate_round: PNC self-interference is cancelled") {
  NoiseParams np{0.05, 0.05, 1.0};
  auto ch = sample_channel(2, 31);
  auto sw = SwitchSpec::pairwise(2, true);
  CVector a(2);
  a << 0.6, 0.5;
  CVector b(2);
  b << Complex(0.3, -0.2), Complex(-0.1, 0.4);
  auto out = make_outcome(ch, sw, np, a, b);
  auto stats = simulate_round(ch, sw, np, out.design, 200000, 8);
  for (int i = 0; i < 2; ++i)
    CHECK(stats.empirical_noise(i) ==
          doctest::Approx(out.epsilon(i)).epsilon(0.05));
}

TEST_CASE("pair_coefficients: diagonal channels and PSD minor") {
  auto sw = SwitchSpec::pairwise(2);
  auto pr = sw.pairs->front();

  auto chi = diag_channel(1.0, 1.0);
  auto pc = pair_coefficients(chi, pr);
  CHECK(pc.h1 == doctest::Approx(1.0));
  CHECK(std::abs(pc.h2) < 1e-15);
  CHECK(pc.h3 == doctest::Approx(1.0));

  auto chd = diag_channel(1.0, 2.0);
  pc = pair_coefficients(chd, pr);
  CHECK(pc.h1 == doctest::Approx(1.0));
  CHECK(pc.h3 == doctest::Approx(0.25));

  // W is HPD, so every 2x2 principal minor is positive.
  auto sw4 = SwitchSpec::pairwise(4);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto ch = sample_channel(4, seed);
    for (auto p : *sw4.pairs) {
      auto c = pair_coefficients(ch, p);
      CHECK(c.h1 > 0.0);
      CHECK(c.h3 > 0.0);
      CHECK(c.h1 * c.h3 > std::norm(c.h2));
    }
  }
}

TEST_CASE("derive_seed: distinct streams and indexes") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}
