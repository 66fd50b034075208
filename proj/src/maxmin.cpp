#include "mimoswitch/maxmin.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace mimoswitch {

namespace {

RVector constraint_rhs(const NoiseParams& np, double eps_target,
                       const RVector& q) {
  RVector rhs(q.size());
  for (int i = 0; i < q.size(); ++i) {
    double denom = eps_target + 1.0 - q(i);
    if (denom <= 0.0)
      throw std::invalid_argument("eps_target below the noise floor");
    rhs(i) = np.sigma2 / denom;
  }
  return rhs;
}

bool effectively_diagonal(const CMatrix& s) {
  double off = 0.0, diag = 0.0;
  for (int i = 0; i < s.rows(); ++i)
    for (int j = 0; j < s.cols(); ++j)
      (i == j ? diag : off) += std::abs(s(i, j));
  return off <= 1e-13 * (1.0 + diag);
}

double quad_form(const CMatrix& s, const CVector& a) {
  return std::real(Complex(a.adjoint() * s * a));
}

// Factor of conj(X): draws xi with covariance X^* per the rounding recipe.
CMatrix conj_factor(const CMatrix& x) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(x);
  CMatrix l = es.eigenvectors() *
              es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return l.conjugate();
}

}  // namespace

QcqpResult qcqp_min_power(const NoiseParams& np, double eps_target,
                          const RVector& q, const CMatrix& s,
                          const SdrConfig& cfg) {
  const int n = static_cast<int>(q.size());
  RVector rhs = constraint_rhs(np, eps_target, q);

  if (effectively_diagonal(s)) {
    // gamma = 0 regime: the relaxation is exact and rounding is trivial.
    CVector a = rhs.cwiseSqrt().cast<Complex>();
    double power = s.diagonal().real().dot(rhs);
    return {power, a, power};
  }

  SdpProblem prob;
  prob.C = s;
  for (int i = 0; i < n; ++i) {
    CMatrix e = CMatrix::Zero(n, n);
    e(i, i) = 1.0;
    prob.constraints.push_back({e, ConstraintSense::GreaterEqual, rhs(i)});
  }
  SdpSolution sol = solve(prob, cfg.sdp);
  if (sol.status == SdpStatus::Infeasible)
    throw std::runtime_error("qcqp_min_power: relaxation reported infeasible");

  RVector amp = rhs.cwiseSqrt();
  auto project = [&](const CVector& xi) {
    CVector a(n);
    for (int i = 0; i < n; ++i) {
      double mag = std::abs(xi(i));
      a(i) = amp(i) * (mag > 1e-300 ? xi(i) / mag : Complex(1.0, 0.0));
    }
    return a;
  };

  // Deterministic rounding: the rank-one candidate first, then Gaussian
  // draws with covariance X^*, each projected onto the modulus constraints.
  CVector best_a = project(rank_one_extract(sol.X).first);
  double best_power = quad_form(s, best_a);

  CMatrix l = conj_factor(sol.X);
  CscgSampler rng(derive_seed(cfg.rng_seed, 0x726e64, 0));
  CVector zeta(n);
  for (int t = 0; t < cfg.randomization_samples; ++t) {
    for (int i = 0; i < n; ++i) zeta(i) = rng.next();
    CVector a = project(l * zeta);
    double power = quad_form(s, a);
    if (power < best_power) {
      best_power = power;
      best_a = a;
    }
  }
  return {best_power, best_a, sol.objective};
}

namespace {

// Outer bisection: smallest eps whose rounded min-power fits the budget,
// then an exact power-equalizing polish along the rounded phases.
SolveOutcome maxmin_outer(const ChannelRealization& ch, const SwitchSpec& sw,
                          const NoiseParams& np, const RVector& q,
                          const CMatrix& s_pow, const CVector& b,
                          const SdrConfig& cfg) {
  const double eps_floor = q.maxCoeff() - 1.0;
  const double scale = 1.0 + std::abs(eps_floor);

  SolverDiagnostics diag;
  auto rounded = [&](double eps) {
    ++diag.sdp_solves;
    return qcqp_min_power(np, eps, q, s_pow, cfg);
  };

  double lo = eps_floor + 1e-13 * scale;
  double delta = 1e-9 * scale;
  double hi = eps_floor + delta;
  QcqpResult at_hi = rounded(hi);
  int grow = 0;
  while (at_hi.power > np.p) {
    lo = hi;
    delta *= 2.0;
    hi = eps_floor + delta;
    if (++grow > cfg.outer_iteration_cap || !std::isfinite(hi))
      throw BracketFailureError();
    at_hi = rounded(hi);
  }
  diag.bracket_lo = lo;
  diag.bracket_hi = hi;

  for (int it = 0; it < cfg.outer_iteration_cap; ++it) {
    if (hi - lo <= cfg.eps_tol * (1.0 + hi)) break;
    double mid = 0.5 * (lo + hi);
    QcqpResult r = rounded(mid);
    diag.iterations = it + 1;
    if (r.power <= np.p) {
      hi = mid;
      at_hi = r;
    } else {
      lo = mid;
    }
  }
  diag.sdp_lower_bound = at_hi.sdp_lower_bound;

  RVector phases(q.size());
  for (int i = 0; i < q.size(); ++i) phases(i) = std::arg(at_hi.a(i));
  SolveOutcome out = solve_eps_given_phases(ch, sw, np, phases, b);
  out.diagnostics.sdp_solves = diag.sdp_solves;
  out.diagnostics.sdp_lower_bound = diag.sdp_lower_bound;
  out.diagnostics.iterations = diag.iterations;
  out.diagnostics.bracket_lo = diag.bracket_lo;
  out.diagnostics.bracket_hi = diag.bracket_hi;
  return out;
}

}  // namespace

SolveOutcome maxmin_solve(const ChannelRealization& ch, const SwitchSpec& sw,
                          const NoiseParams& np, const SdrConfig& cfg) {
  RVector q = compute_Q(ch, sw, np).diagonal().real();
  CMatrix s = compute_S(ch, sw, np);
  return maxmin_outer(ch, sw, np, q, s, CVector::Zero(sw.size()), cfg);
}

SolveOutcome maxmin_exhaustive_2(const ChannelRealization& ch,
                                 const SwitchSpec& sw, const NoiseParams& np,
                                 int magnitude_grid, int phase_grid) {
  if (sw.size() != 2)
    throw std::invalid_argument("maxmin_exhaustive_2: N must be 2");
  CMatrix qmat = compute_Q(ch, sw, np);
  CMatrix s = compute_S(ch, sw, np);
  const double q1 = std::real(qmat(0, 0)), q2 = std::real(qmat(1, 1));
  const double s11 = std::real(s(0, 0)), s22 = std::real(s(1, 1));
  const Complex s12 = s(0, 1);
  const double p = np.p, sg2 = np.sigma2;

  // Optima spend the whole budget, so scan gain directions on the
  // full-power sphere: a = sqrt(p / pw) * (cos t, sin t e^{j phi}).
  auto objective = [&](double t, double phi) {
    double c = std::cos(t), sn = std::sin(t);
    double pw = s11 * c * c + s22 * sn * sn +
                2.0 * c * sn * std::real(s12 * std::polar(1.0, phi));
    double a1sq = p * c * c / pw, a2sq = p * sn * sn / pw;
    return std::max(q1 - 1.0 + sg2 / a1sq, q2 - 1.0 + sg2 / a2sq);
  };

  const double half_pi = 0.5 * std::numbers::pi;
  double t_lo = 0.0, t_hi = half_pi;
  double best_t = half_pi / 2, best_phi = std::numbers::pi;
  double best_eps = objective(best_t, best_phi);

  for (int pass = 0; pass < 2; ++pass) {
    double t_step = (t_hi - t_lo) / (magnitude_grid + 1);
    for (int k = 1; k <= magnitude_grid; ++k) {
      double t = t_lo + k * t_step;
      for (int j = 0; j < phase_grid; ++j) {
        double phi = 2.0 * std::numbers::pi * j / phase_grid;
        double eps = objective(t, phi);
        if (eps < best_eps) {
          best_eps = eps;
          best_t = t;
          best_phi = phi;
        }
      }
    }
    // Refine around the incumbent.
    t_lo = std::max(0.0, best_t - 2.0 * t_step);
    t_hi = std::min(half_pi, best_t + 2.0 * t_step);
  }

  double c = std::cos(best_t), sn = std::sin(best_t);
  double pw = s11 * c * c + s22 * sn * sn +
              2.0 * c * sn * std::real(s12 * std::polar(1.0, best_phi));
  double scale = std::sqrt(p / pw);
  CVector a(2);
  a << scale * c, scale * sn * std::polar(1.0, best_phi);
  return make_outcome(ch, sw, np, a, CVector::Zero(2));
}

double sdr_upper_bound(const ChannelRealization& ch, const SwitchSpec& sw,
                       const NoiseParams& np, const SdrConfig& cfg) {
  RVector q = compute_Q(ch, sw, np).diagonal().real();
  CMatrix s = compute_S(ch, sw, np);
  const int n = sw.size();
  const double eps_floor = q.maxCoeff() - 1.0;
  const double scale = 1.0 + std::abs(eps_floor);

  auto relaxation_value = [&](double eps) {
    RVector rhs = constraint_rhs(np, eps, q);
    if (effectively_diagonal(s)) return s.diagonal().real().dot(rhs);
    SdpProblem prob;
    prob.C = s;
    for (int i = 0; i < n; ++i) {
      CMatrix e = CMatrix::Zero(n, n);
      e(i, i) = 1.0;
      prob.constraints.push_back({e, ConstraintSense::GreaterEqual, rhs(i)});
    }
    return solve(prob, cfg.sdp).objective;
  };

  double lo = eps_floor + 1e-13 * scale;
  double delta = 1e-9 * scale;
  double hi = eps_floor + delta;
  int grow = 0;
  while (relaxation_value(hi) > np.p) {
    lo = hi;
    delta *= 2.0;
    hi = eps_floor + delta;
    if (++grow > cfg.outer_iteration_cap || !std::isfinite(hi))
      throw BracketFailureError();
  }
  for (int it = 0; it < cfg.outer_iteration_cap; ++it) {
    if (hi - lo <= cfg.eps_tol * (1.0 + hi)) break;
    double mid = 0.5 * (lo + hi);
    (relaxation_value(mid) <= np.p ? hi : lo) = mid;
  }
  // The infeasible-side endpoint keeps the bound valid under bisection slack.
  return throughput(lo);
}

SolveOutcome pnc_fix_b_step(const ChannelRealization& ch, const SwitchSpec& sw,
                            const NoiseParams& np, const CVector& b,
                            const SdrConfig& cfg) {
  RVector q = compute_R(ch, sw, np, b).diagonal().real();
  CMatrix s = compute_power_matrix(ch, sw, np, b);
  return maxmin_outer(ch, sw, np, q, s, b, cfg);
}

CVector pnc_fix_a_step(const ChannelRealization& ch, const SwitchSpec& sw,
                       const NoiseParams& np, const CVector& a,
                       double eps_target, const SdrConfig& cfg,
                       const CVector* incumbent_b) {
  const int n = sw.size();
  const CMatrix pc = sw.P.cast<Complex>();

  // M = A^H W^* A, Nmat = I + gamma^2 W, S_t = Nmat^T (.) M, f = diag(M P N).
  CMatrix m = a.conjugate().asDiagonal() * ch.Wstar * a.asDiagonal();
  CMatrix nmat = CMatrix::Identity(n, n) + np.gamma2 * ch.W;
  CMatrix s_t = nmat.transpose().cwiseProduct(m);
  CVector f = (m * pc * nmat).diagonal();

  if (np.gamma2 == 0.0) {
    // Noise caps are vacuous: minimize the power quadratic directly.
    CMatrix reg = s_t + 1e-12 * s_t.norm() * CMatrix::Identity(n, n);
    return -reg.ldlt().solve(f);
  }

  RVector caps(n);
  for (int i = 0; i < n; ++i) {
    caps(i) = (eps_target - np.sigma2 / std::norm(a(i))) / np.gamma2;
    if (caps(i) < -1e-12) throw InfeasibleNoiseCapsError();
  }

  // Homogenized quadratic data for station i: bt^H At_i bt equals
  // [(P t + B) W (P t + B)^H]_ii over bt = (b, t).
  const CMatrix pw = pc * ch.W;
  const CMatrix pwp = pw * pc.transpose();
  auto noise_quad = [&](const CVector& b) {
    CVector vals(n);
    for (int i = 0; i < n; ++i)
      vals(i) = std::real(ch.W(i, i)) * std::norm(b(i)) +
                2.0 * std::real(std::conj(b(i)) * pw(i, i)) +
                std::real(pwp(i, i));
    return vals.real().eval();
  };

  SdpProblem prob;
  prob.C = CMatrix::Zero(n + 1, n + 1);
  prob.C.topLeftCorner(n, n) = s_t;
  prob.C.topRightCorner(n, 1) = f;
  prob.C.bottomLeftCorner(1, n) = f.adjoint();
  for (int i = 0; i < n; ++i) {
    CMatrix at = CMatrix::Zero(n + 1, n + 1);
    at(i, i) = ch.W(i, i);
    at(i, n) = pw(i, i);
    at(n, i) = std::conj(pw(i, i));
    at(n, n) = pwp(i, i);
    // Upper cap as >= of the negated form, with a hair of slack so the
    // incumbent (which sits on the cap) keeps an interior neighborhood.
    double cap = caps(i) * (1.0 + 1e-9) + 1e-12;
    prob.constraints.push_back({-at, ConstraintSense::GreaterEqual, -cap});
  }
  CMatrix e_t = CMatrix::Zero(n + 1, n + 1);
  e_t(n, n) = 1.0;
  prob.constraints.push_back({e_t, ConstraintSense::Equal, 1.0});

  SdpSolution sol = solve(prob, cfg.sdp);

  // Candidate pool: rank-one extraction (global phase absorbed), Gaussian
  // draws, and the incumbent as a non-regression fallback.
  std::vector<CVector> candidates;
  if (sol.status != SdpStatus::Infeasible) {
    auto [v, resid] = rank_one_extract(sol.X);
    if (std::abs(v(n)) > 1e-10) candidates.push_back(v.head(n) / v(n));
    CMatrix l = conj_factor(sol.X);
    CscgSampler rng(derive_seed(cfg.rng_seed, 0x66697861, 0));
    CVector zeta(n + 1);
    int draws = std::min(cfg.randomization_samples, 200);
    for (int t = 0; t < draws; ++t) {
      for (int i = 0; i <= n; ++i) zeta(i) = rng.next();
      CVector xi = l * zeta;
      if (std::abs(xi(n)) > 1e-10) candidates.push_back(xi.head(n) / xi(n));
    }
  }
  if (incumbent_b) candidates.push_back(*incumbent_b);

  const CVector* best = nullptr;
  double best_power = std::numeric_limits<double>::infinity();
  for (const CVector& b : candidates) {
    RVector quad = noise_quad(b);
    bool ok = true;
    for (int i = 0; i < n; ++i)
      if (quad(i) > caps(i) * (1.0 + 1e-7) + 1e-9) ok = false;
    if (!ok) continue;
    double power = relay_power(ch, sw, np, a, b);
    if (power < best_power) {
      best_power = power;
      best = &b;
    }
  }
  if (!best) throw InfeasibleNoiseCapsError();
  return *best;
}

SolveOutcome pnc_maxmin_iterate(const ChannelRealization& ch,
                                const SwitchSpec& sw, const NoiseParams& np,
                                const IterativeConfig& icfg,
                                const SdrConfig& cfg) {
  // Coordinate descent from b = 0 can stall at the zero-forcing solution
  // (a verified local optimum on many channels), so pairwise patterns start
  // from the pair-cancelling b instead.
  CVector b;
  if (icfg.initial_b.size() == sw.size())
    b = icfg.initial_b;
  else if (sw.pairs)
    b = pair_cancelling_b(ch, sw);
  else
    b = CVector::Zero(sw.size());
  SolveOutcome best = pnc_fix_b_step(ch, sw, np, b, cfg);
  int alternations = 0;

  for (int it = 0; it < icfg.max_alternations; ++it) {
    double eps_prev = best.max_epsilon();
    const CVector& a = best.design.a;

    // B-step: one-dimensional search over the noise target, taking the
    // smallest eps whose minimum power over b still fits the budget.
    double lo = 0.0;
    for (int i = 0; i < sw.size(); ++i)
      lo = std::max(lo, np.sigma2 / std::norm(a(i)));
    double hi = eps_prev;
    CVector b_next = b;
    for (int bis = 0; bis < 40 && hi - lo > icfg.eps_tol * (1.0 + hi);
         ++bis) {
      double mid = 0.5 * (lo + hi);
      try {
        CVector cand = pnc_fix_a_step(ch, sw, np, a, mid, cfg);
        if (relay_power(ch, sw, np, a, cand) <= np.p) {
          hi = mid;
          b_next = cand;
        } else {
          lo = mid;
        }
      } catch (const InfeasibleNoiseCapsError&) {
        lo = mid;
      }
    }

    SolveOutcome next = pnc_fix_b_step(ch, sw, np, b_next, cfg);
    ++alternations;
    if (next.max_epsilon() < best.max_epsilon()) {
      best = std::move(next);
      b = b_next;
    }
    if (std::abs(eps_prev - best.max_epsilon()) <=
        icfg.eps_tol * (1.0 + best.max_epsilon()))
      break;
  }
  best.diagnostics.iterations = alternations;
  return best;
}

}  // namespace mimoswitch
