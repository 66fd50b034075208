/**
 * @file maxmin.hpp
 * @brief Maxmin-SNR solvers: QCQP semidefinite relaxation with Gaussian
 * randomization, outer noise-level search, exhaustive N=2 baseline, and the
 * alternating A/B optimization for network-coded relaying.
 */
#ifndef MIMOSWITCH_MAXMIN_HPP
#define MIMOSWITCH_MAXMIN_HPP

#include "mimoswitch/eqsnr.hpp"
#include "mimoswitch/model.hpp"
#include "mimoswitch/sdp.hpp"

namespace mimoswitch {

class InfeasibleNoiseCapsError : public std::runtime_error {
 public:
  InfeasibleNoiseCapsError()
      : std::runtime_error(
            "per-station noise caps are infeasible for the given gains") {}
};

struct SdrConfig {
  int randomization_samples = 1000;
  double eps_tol = 1e-6;  // relative tolerance of the outer search
  int outer_iteration_cap = 200;
  SdpOptions sdp;
  std::uint64_t rng_seed = 0;
};

struct IterativeConfig {
  int max_alternations = 20;
  double eps_tol = 1e-4;  // stop when |delta eps| <= tol * (1 + eps)
  CVector initial_b;      // empty means zero
};

struct QcqpResult {
  double power;             // rounded feasible power a^H S a
  CVector a;                // feasible gains, |a_i|^2 >= rhs_i
  double sdp_lower_bound;   // SDP relaxation value, <= power
};

// Minimum-power QCQP at a fixed noise target: min a^H S a subject to
// |a_i|^2 >= sigma^2 / (eps_target + 1 - q_i). SDR plus Gaussian
// randomization rounding (each modulus bound met with equality).
QcqpResult qcqp_min_power(const NoiseParams& np, double eps_target,
                          const RVector& q, const CMatrix& s,
                          const SdrConfig& cfg);

// Maxmin via bisection of the noise target against the rounded min-power.
SolveOutcome maxmin_solve(const ChannelRealization& ch, const SwitchSpec& sw,
                          const NoiseParams& np, const SdrConfig& cfg);

// Exhaustive N=2 reference: gain-direction x phase-difference grid on the
// full-power sphere, plus one local refinement pass.
SolveOutcome maxmin_exhaustive_2(const ChannelRealization& ch,
                                 const SwitchSpec& sw, const NoiseParams& np,
                                 int magnitude_grid = 200, int phase_grid = 64);

// Worst-station throughput upper bound from the unrounded relaxation.
double sdr_upper_bound(const ChannelRealization& ch, const SwitchSpec& sw,
                       const NoiseParams& np, const SdrConfig& cfg);

// Network-coded maxmin with B fixed: redefines q_i = R_ii and the power
// quadratic, then solves the zero-forcing problem.
SolveOutcome pnc_fix_b_step(const ChannelRealization& ch, const SwitchSpec& sw,
                            const NoiseParams& np, const CVector& b,
                            const SdrConfig& cfg);

// Network-coded power minimization over B with A fixed, via the homogenized
// SDR in (b, t), |t| = 1; the global phase of t is absorbed into b.
// `incumbent_b` (when given) is kept as a fallback candidate so the
// alternation can never regress.
CVector pnc_fix_a_step(const ChannelRealization& ch, const SwitchSpec& sw,
                       const NoiseParams& np, const CVector& a,
                       double eps_target, const SdrConfig& cfg,
                       const CVector* incumbent_b = nullptr);

// Alternate the two block solvers until the noise level stops improving.
SolveOutcome pnc_maxmin_iterate(const ChannelRealization& ch,
                                const SwitchSpec& sw, const NoiseParams& np,
                                const IterativeConfig& icfg,
                                const SdrConfig& cfg);

}  // namespace mimoswitch

#endif
