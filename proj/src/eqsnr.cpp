#include "mimoswitch/eqsnr.hpp"

#include <cmath>
#include <numbers>

namespace mimoswitch {

namespace {

// Relay power consumed when every station is driven to noise level eps.
double power_at_eps(const RVector& q, const CMatrix& s_pow, const CVector& u,
                    double sigma2, double eps) {
  int n = static_cast<int>(q.size());
  CVector a(n);
  for (int i = 0; i < n; ++i)
    a(i) = std::sqrt(sigma2 / (eps + 1.0 - q(i))) * u(i);
  return std::real(Complex(a.adjoint() * s_pow * a));
}

}  // namespace

SolveOutcome solve_eps_given_phases(const ChannelRealization& ch,
                                    const SwitchSpec& sw,
                                    const NoiseParams& np,
                                    const RVector& phases, const CVector& b,
                                    const EpsSearchConfig& cfg) {
  const int n = sw.size();
  CMatrix r = compute_R(ch, sw, np, b);
  RVector q = r.diagonal().real();
  CMatrix s_pow = compute_power_matrix(ch, sw, np, b);
  CVector u(n);
  for (int i = 0; i < n; ++i)
    u(i) = std::polar(1.0, phases(i));

  const double eps_floor = q.maxCoeff() - 1.0;
  const double scale = 1.0 + std::abs(eps_floor);
  double lo = eps_floor + 1e-13 * scale;

  // Grow the bracket geometrically until the power drops below budget.
  double delta = 1e-9 * scale;
  double hi = eps_floor + delta;
  int grow = 0;
  while (power_at_eps(q, s_pow, u, np.sigma2, hi) > np.p) {
    lo = hi;
    delta *= cfg.bracket_growth;
    hi = eps_floor + delta;
    if (++grow > cfg.max_iterations || !std::isfinite(hi))
      throw BracketFailureError();
  }

  SolverDiagnostics diag;
  diag.bracket_lo = lo;
  diag.bracket_hi = hi;

  double eps = hi;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    eps = 0.5 * (lo + hi);
    double f = power_at_eps(q, s_pow, u, np.sigma2, eps) - np.p;
    diag.iterations = it + 1;
    if (std::abs(f) <= cfg.power_tol * np.p) break;
    (f > 0 ? lo : hi) = eps;
  }

  CVector a(n);
  for (int i = 0; i < n; ++i)
    a(i) = std::sqrt(np.sigma2 / (eps + 1.0 - q(i))) * u(i);
  SolveOutcome out = make_outcome(ch, sw, np, a, b);
  out.diagnostics = diag;
  return out;
}

SolveOutcome closed_form_two_station(const ChannelRealization& ch,
                                     const SwitchSpec& sw,
                                     const NoiseParams& np) {
  if (sw.size() != 2 || sw.P(0, 0) != 0.0)
    throw std::invalid_argument(
        "closed_form_two_station: needs the N=2 derangement");

  CMatrix qmat = compute_Q(ch, sw, np);
  CMatrix s = compute_S(ch, sw, np);
  const double q1 = std::real(qmat(0, 0)), q2 = std::real(qmat(1, 1));
  const double s11 = std::real(s(0, 0)), s22 = std::real(s(1, 1));
  const double s12 = std::real(s(0, 1));  // s12 = s21 >= 0 for this pattern
  const double qd = q1 - q2;
  const double sg2 = np.sigma2, sg4 = sg2 * sg2, p = np.p;

  // Biquartic in z = a_1^2 obtained by eliminating a_2 through the equal
  // noise power constraint and forcing the power budget.
  QuarticCoefficients quartic{
      s11 * s11 * qd * qd,
      2.0 * qd * (s11 * s11 * sg2 + s11 * s22 * sg2 - s11 * p * qd -
                  2.0 * s12 * s12 * sg2),
      sg4 * (s11 + s22) * (s11 + s22) + p * p * qd * qd -
          2.0 * p * sg2 * qd * (2.0 * s11 + s22) - 4.0 * s12 * s12 * sg4,
      2.0 * p * p * sg2 * qd - 2.0 * p * sg4 * (s11 + s22),
      p * p * sg4};

  auto roots = real_roots(quartic);
  if (roots.empty()) throw NoRealRootError();

  // Squaring introduces spurious roots: keep only those that reproduce the
  // power budget, then take the largest a_1 (smallest eps).
  double best_z = -1.0, best_a2 = 0.0;
  for (double z : roots) {
    if (z <= 0.0) continue;
    double denom = qd + sg2 / z;
    if (denom <= 0.0) continue;
    double a2 = -std::sqrt(sg2 / denom);
    double power = s11 * z + 2.0 * s12 * std::sqrt(z) * a2 + a2 * a2 * s22;
    if (std::abs(power - p) > 1e-6 * p) continue;
    if (z > best_z) {
      best_z = z;
      best_a2 = a2;
    }
  }

  if (best_z <= 0.0) {
    // Numerically degenerate coefficients; the opposite-sign one-dimensional
    // search solves the identical problem.
    RVector phases(2);
    phases << 0.0, std::numbers::pi;
    return solve_eps_given_phases(ch, sw, np, phases, CVector::Zero(2));
  }

  CVector a(2);
  a << std::sqrt(best_z), best_a2;
  return make_outcome(ch, sw, np, a, CVector::Zero(2));
}

SolveOutcome opposite_phase(const ChannelRealization& ch, const SwitchSpec& sw,
                            const NoiseParams& np) {
  if (!sw.pairs) throw PairingAbsentError();
  RVector phases = RVector::Zero(sw.size());
  for (const auto& [i, j] : *sw.pairs) {
    phases(i) = 0.0;
    phases(j) = std::numbers::pi;
  }
  return solve_eps_given_phases(ch, sw, np, phases, CVector::Zero(sw.size()));
}

std::vector<RVector> phase_candidates(int n, const PhaseSearchConfig& cfg) {
  CscgSampler rng(derive_seed(cfg.rng_seed, 0x70686173, 0));
  std::vector<RVector> cands;
  cands.reserve(cfg.trials);
  const double bin_width = 2.0 * std::numbers::pi / cfg.bins;
  for (int t = 0; t < cfg.trials; ++t) {
    RVector ph(n);
    for (int i = 0; i < n; ++i) {
      int bin = std::min(static_cast<int>(rng.next_uniform() * cfg.bins),
                         cfg.bins - 1);
      ph(i) = bin * bin_width;
    }
    cands.push_back(std::move(ph));
  }
  return cands;
}

SolveOutcome random_phase(const ChannelRealization& ch, const SwitchSpec& sw,
                          const NoiseParams& np,
                          const PhaseSearchConfig& cfg) {
  CVector b = CVector::Zero(sw.size());
  SolveOutcome best;
  bool have = false;
  for (const RVector& ph : phase_candidates(sw.size(), cfg)) {
    SolveOutcome out = solve_eps_given_phases(ch, sw, np, ph, b);
    if (!have || out.max_epsilon() < best.max_epsilon()) {
      best = std::move(out);
      have = true;
    }
  }
  if (!have) throw std::invalid_argument("random_phase: no trials");
  return best;
}

CVector pair_cancelling_b(const ChannelRealization& ch, const SwitchSpec& sw) {
  if (!sw.pairs) throw PairingAbsentError();
  CVector b = CVector::Zero(sw.size());
  for (const auto& pr : *sw.pairs) {
    PairCoefficients hc = pair_coefficients(ch, pr);
    b(pr.first) = -std::conj(hc.h2) / hc.h1;
    b(pr.second) = -hc.h2 / hc.h3;
  }
  return b;
}

SolveOutcome pnc_phase_aligned(const ChannelRealization& ch,
                               const SwitchSpec& sw, const NoiseParams& np) {
  CVector b = pair_cancelling_b(ch, sw);
  return solve_eps_given_phases(ch, sw, np, RVector::Zero(sw.size()), b);
}

RVector default_b_grid() {
  RVector grid(41);
  for (int i = 0; i < 41; ++i) grid(i) = -2.0 + 0.1 * i;
  return grid;
}

SolveOutcome pnc_identical_b(const ChannelRealization& ch,
                             const SwitchSpec& sw, const NoiseParams& np,
                             const PhaseSearchConfig& cfg,
                             const RVector& b_grid) {
  const int n = sw.size();
  auto cands = phase_candidates(n, cfg);

  // Optional per-element phases of b, drawn from the same bin structure.
  std::vector<RVector> b_phases;
  if (cfg.per_element_b_phases) {
    PhaseSearchConfig bcfg = cfg;
    bcfg.rng_seed = derive_seed(cfg.rng_seed, 0x62706873, 0);
    b_phases = phase_candidates(n, bcfg);
  }

  SolveOutcome best;
  bool have = false;
  for (int g = 0; g < b_grid.size(); ++g) {
    for (size_t t = 0; t < cands.size(); ++t) {
      CVector b = CVector::Constant(n, Complex(b_grid(g), 0.0));
      if (cfg.per_element_b_phases && b_grid(g) != 0.0)
        for (int i = 0; i < n; ++i)
          b(i) *= std::polar(1.0, b_phases[t](i));
      SolveOutcome out;
      try {
        out = solve_eps_given_phases(ch, sw, np, cands[t], b);
      } catch (const BracketFailureError&) {
        continue;  // pathological b value; other grid points still apply
      }
      if (!have || out.max_epsilon() < best.max_epsilon()) {
        best = std::move(out);
        have = true;
      }
    }
  }
  if (!have) throw BracketFailureError();
  return best;
}

}  // namespace mimoswitch
