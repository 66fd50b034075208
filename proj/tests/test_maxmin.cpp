#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "mimoswitch/maxmin.hpp"

using namespace mimoswitch;

namespace {

constexpr double kPi = std::numbers::pi;

SdrConfig fast_sdr(std::uint64_t seed = 0) {
  SdrConfig cfg;
  cfg.randomization_samples = 500;
  cfg.rng_seed = seed;
  return cfg;
}

ChannelRealization identity_channel(int n) {
  return ChannelRealization::from_matrix(CMatrix::Identity(n, n));
}

}  // namespace

TEST_CASE("qcqp_min_power: gamma = 0 regime is exact") {
  NoiseParams np{0.0, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    int n = seed % 2 ? 2 : 4;
    auto ch = sample_channel(n, seed);
    auto sw = SwitchSpec::pairwise(n);
    RVector q = compute_Q(ch, sw, np).diagonal().real();
    CMatrix s = compute_S(ch, sw, np);
    double eps = 0.25;
    auto res = qcqp_min_power(np, eps, q, s, fast_sdr(seed));
    double want = np.sigma2 / eps * ch.W.trace().real();
    CHECK(res.power == doctest::Approx(want).epsilon(1e-9));
    CHECK(res.sdp_lower_bound == doctest::Approx(want).epsilon(1e-9));
    for (int i = 0; i < n; ++i)
      CHECK(std::norm(res.a(i)) >=
            np.sigma2 / (eps + 1.0 - q(i)) * (1.0 - 1e-12));
  }
}

TEST_CASE("qcqp_min_power: rounded power within 2% of a brute-force search") {
  NoiseParams np{0.1, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto ch = sample_channel(2, seed);
    auto sw = SwitchSpec::pairwise(2);
    RVector q = compute_Q(ch, sw, np).diagonal().real();
    CMatrix s = compute_S(ch, sw, np);
    double eps = q.maxCoeff() - 1.0 + 0.3;
    auto res = qcqp_min_power(np, eps, q, s, fast_sdr(seed));
    CHECK(res.sdp_lower_bound <= res.power + 1e-7 * (1.0 + res.power));

    // Exhaustive over magnitudes above the bounds and the relative phase.
    double m1 = std::sqrt(np.sigma2 / (eps + 1.0 - q(0)));
    double m2 = std::sqrt(np.sigma2 / (eps + 1.0 - q(1)));
    double best = 1e300;
    for (int i = 0; i <= 60; ++i)
      for (int j = 0; j <= 60; ++j)
        for (int k = 0; k < 96; ++k) {
          CVector a(2);
          a << m1 * (1.0 + 0.05 * i),
              m2 * (1.0 + 0.05 * j) *
                  std::polar(1.0, 2.0 * kPi * k / 96);
          best = std::min(best, (a.adjoint() * s * a).value().real());
        }
    CHECK(res.power <= best * 1.02);
    CHECK(res.power >= best * 0.90);  // brute force is itself a bound
  }
}

TEST_CASE("qcqp_min_power: rejects targets below the noise floor") {
  NoiseParams np{0.1, 0.1, 1.0};
  auto ch = sample_channel(2, 4);
  auto sw = SwitchSpec::pairwise(2);
  RVector q = compute_Q(ch, sw, np).diagonal().real();
  CMatrix s = compute_S(ch, sw, np);
  CHECK_THROWS(qcqp_min_power(np, q.maxCoeff() - 1.0 - 1e-3, q, s,
                              fast_sdr()));
}

TEST_CASE("maxmin_solve: gamma = 0 equals the equal-SNR value") {
  NoiseParams np{0.0, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    int n = seed % 2 ? 2 : 4;
    auto ch = sample_channel(n, seed);
    auto out = maxmin_solve(ch, SwitchSpec::pairwise(n), np, fast_sdr(seed));
    double want = np.sigma2 * ch.W.trace().real() / np.p;
    CHECK(out.max_epsilon() == doctest::Approx(want).epsilon(1e-6));
    CHECK(out.power_used == doctest::Approx(np.p).epsilon(1e-6));
  }
}

TEST_CASE("maxmin_solve: never worse than the equal-SNR solvers") {
  NoiseParams np{0.1, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto ch = sample_channel(2, seed);
    auto sw = SwitchSpec::pairwise(2);
    auto mm = maxmin_solve(ch, sw, np, fast_sdr(seed));
    double eq = closed_form_two_station(ch, sw, np).max_epsilon();
    CHECK(mm.max_epsilon() <= eq * (1.0 + 1e-5));
    CHECK(mm.power_used == doctest::Approx(np.p).epsilon(1e-6));
    CHECK(mm.diagnostics.sdp_solves > 0);
  }
}

TEST_CASE("maxmin_exhaustive_2: worked case and SDR cross-check") {
  NoiseParams np{0.1, 0.1, 1.0};
  auto sw = SwitchSpec::pairwise(2);
  auto out = maxmin_exhaustive_2(identity_channel(2), sw, np);
  CHECK(out.max_epsilon() == doctest::Approx(0.32).epsilon(1e-4));

  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto ch = sample_channel(2, seed);
    auto ex = maxmin_exhaustive_2(ch, sw, np);
    auto mm = maxmin_solve(ch, sw, np, fast_sdr(seed));
    CHECK(ex.power_used == doctest::Approx(np.p).epsilon(1e-9));
    // Exhaustive and SDR agree within grid slack.
    CHECK(std::abs(ex.max_epsilon() - mm.max_epsilon()) <=
          5e-3 * ex.max_epsilon());
    // At the optimum the worst station is tight by definition and
    // the gain vector exhausts the power budget.
    CHECK(ex.epsilon.maxCoeff() >= ex.epsilon.minCoeff());
  }
}

TEST_CASE("sdr_upper_bound: upper-bounds every feasible design") {
  NoiseParams np{0.1, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto ch = sample_channel(2, seed);
    auto sw = SwitchSpec::pairwise(2);
    double ub = sdr_upper_bound(ch, sw, np, fast_sdr(seed));
    CHECK(ub >= maxmin_solve(ch, sw, np, fast_sdr(seed)).min_throughput() -
                    1e-7);
    CHECK(ub >=
          closed_form_two_station(ch, sw, np).min_throughput() - 1e-7);
    CHECK(ub >= maxmin_exhaustive_2(ch, sw, np).min_throughput() - 1e-7);
  }
}

TEST_CASE("pnc_fix_b_step: b = 0 reduces to maxmin_solve") {
  NoiseParams np{0.1, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto ch = sample_channel(2, seed);
    auto sw = SwitchSpec::pairwise(2, true);
    auto fixed = pnc_fix_b_step(ch, sw, np, CVector::Zero(2), fast_sdr(seed));
    auto plain = maxmin_solve(ch, SwitchSpec::pairwise(2), np,
                              fast_sdr(seed));
    CHECK(fixed.max_epsilon() ==
          doctest::Approx(plain.max_epsilon()).epsilon(1e-9));
    CHECK(fixed.design.b.norm() == 0.0);
  }
}

TEST_CASE("pnc_fix_b_step: redefined power matrix stays Hermitian PSD") {
  NoiseParams np{0.1, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto ch = sample_channel(4, seed);
    auto sw = SwitchSpec::pairwise(4, true);
    CVector b = testing::random_cvector(4, seed + 40);
    CMatrix sp = compute_power_matrix(ch, sw, np, b);
    CHECK(is_hermitian(sp, 1e-10));
    CHECK(psd_check(sp).psd);
  }
}

TEST_CASE("pnc_fix_b_step: pair-cancelling b improves on zero forcing") {
  NoiseParams np{0.1, 0.1, 1.0};
  double sum_pnc = 0.0, sum_zf = 0.0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto ch = sample_channel(2, seed);
    auto sw = SwitchSpec::pairwise(2, true);
    CVector b = pair_cancelling_b(ch, sw);
    sum_pnc += pnc_fix_b_step(ch, sw, np, b, fast_sdr(seed)).max_epsilon();
    sum_zf += maxmin_solve(ch, SwitchSpec::pairwise(2), np, fast_sdr(seed))
                  .max_epsilon();
  }
  CHECK(sum_pnc < sum_zf);
}

TEST_CASE("pnc_fix_a_step: H = I keeps b = 0") {
  NoiseParams np{0.1, 0.1, 1.0};
  auto ch = identity_channel(2);
  auto sw = SwitchSpec::pairwise(2, true);
  CVector a(2);
  a << 1.0 / std::sqrt(2.2), 1.0 / std::sqrt(2.2);
  CVector b = pnc_fix_a_step(ch, sw, np, a, 0.4, fast_sdr(1));
  CHECK(b.norm() < 1e-5);
}

TEST_CASE("pnc_fix_a_step: gamma = 0 matches the quadratic minimizer") {
  NoiseParams np{0.0, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto ch = sample_channel(2, seed);
    auto sw = SwitchSpec::pairwise(2, true);
    CVector a = testing::random_cvector(2, seed + 5);
    CVector b = pnc_fix_a_step(ch, sw, np, a, 1.0, fast_sdr(seed));
    // Direct oracle: minimize a^H S'(b) a = b~^H [S_t f; f^H *] b~ over b.
    CMatrix m = CMatrix(a.conjugate().asDiagonal()) * ch.Wstar *
                CMatrix(a.asDiagonal());
    CMatrix nn = CMatrix::Identity(2, 2);  // N = I at gamma = 0
    CMatrix st = nn.transpose().cwiseProduct(m);
    CVector f = (m * sw.P.cast<Complex>() * nn).diagonal();
    CVector want = -st.ldlt().solve(f);
    double got = relay_power(ch, sw, np, a, b);
    double opt = relay_power(ch, sw, np, a, want);
    CHECK(got <= opt * (1.0 + 1e-5) + 1e-12);
  }
}

TEST_CASE("pnc_fix_a_step: never worse than keeping b = 0") {
  NoiseParams np{0.1, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto ch = sample_channel(2, seed);
    auto swz = SwitchSpec::pairwise(2);
    auto sw = SwitchSpec::pairwise(2, true);
    // Gains from the zero-forcing solution; its eps target admits b = 0.
    auto zf = maxmin_solve(ch, swz, np, fast_sdr(seed));
    double eps = zf.max_epsilon() * (1.0 + 1e-6);
    CVector b = pnc_fix_a_step(ch, sw, np, zf.design.a, eps, fast_sdr(seed));
    double with_b = relay_power(ch, sw, np, zf.design.a, b);
    double without = relay_power(ch, sw, np, zf.design.a, CVector::Zero(2));
    CHECK(with_b <= without * (1.0 + 1e-6));
    // Caps respected: post noise no worse than the target.
    RVector eps_b = post_noise(ch, sw, np, zf.design.a, b);
    CHECK(eps_b.maxCoeff() <= eps * (1.0 + 1e-6));
  }
}

TEST_CASE("pnc_fix_a_step: infeasible caps are signalled") {
  NoiseParams np{0.1, 0.1, 1.0};
  auto ch = sample_channel(2, 9);
  auto sw = SwitchSpec::pairwise(2, true);
  CVector a(2);
  a << 0.5, 0.5;
  // sigma^2 / |a_i|^2 = 0.4 already exceeds this target.
  CHECK_THROWS_AS(pnc_fix_a_step(ch, sw, np, a, 0.3, fast_sdr()),
                  InfeasibleNoiseCapsError);
}

TEST_CASE("pnc_maxmin_iterate: improves on both building blocks") {
  NoiseParams np{0.1, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto ch = sample_channel(2, seed);
    auto sw = SwitchSpec::pairwise(2, true);
    IterativeConfig icfg;
    auto it = pnc_maxmin_iterate(ch, sw, np, icfg, fast_sdr(seed));
    CHECK(it.power_used == doctest::Approx(np.p).epsilon(1e-6));
    // Never worse than the phase-aligned heuristic (its b is the starting
    // point) nor the zero-forcing maxmin.
    double pa = pnc_phase_aligned(ch, sw, np).max_epsilon();
    CHECK(it.max_epsilon() <= pa * (1.0 + 1e-4));
    double zf = maxmin_solve(ch, SwitchSpec::pairwise(2), np, fast_sdr(seed))
                    .max_epsilon();
    CHECK(it.max_epsilon() <= zf * (1.0 + 1e-4));
    CHECK(it.diagnostics.iterations >= 1);
  }
}

TEST_CASE("pnc_maxmin_iterate: explicit initial b is honoured and safe") {
  NoiseParams np{0.1, 0.1, 1.0};
  auto ch = sample_channel(2, 14);
  auto sw = SwitchSpec::pairwise(2, true);
  IterativeConfig icfg;
  icfg.initial_b = pair_cancelling_b(ch, sw);
  auto a = pnc_maxmin_iterate(ch, sw, np, icfg, fast_sdr(2));
  IterativeConfig perturbed = icfg;
  perturbed.initial_b = icfg.initial_b * 1.05;
  auto b = pnc_maxmin_iterate(ch, sw, np, perturbed, fast_sdr(2));
  // Nearby initializations land on comparable solutions.
  CHECK(std::abs(a.max_epsilon() - b.max_epsilon()) <=
        0.05 * a.max_epsilon());
}

TEST_CASE("pnc_maxmin_iterate: non-pairwise pattern beats zero forcing on "
          "average") {
  NoiseParams np{0.1, 0.1, 1.0};
  double sum_pnc = 0.0, sum_zf = 0.0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    auto ch = sample_channel(4, seed);
    IterativeConfig icfg;
    sum_pnc += pnc_maxmin_iterate(ch, SwitchSpec::non_pairwise4(true), np,
                                  icfg, fast_sdr(seed))
                   .min_throughput();
    sum_zf += maxmin_solve(ch, SwitchSpec::non_pairwise4(), np,
                           fast_sdr(seed))
                  .min_throughput();
  }
  CHECK(sum_pnc >= sum_zf * (1.0 - 1e-6));
}
