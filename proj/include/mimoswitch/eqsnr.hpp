/**
 * @file eqsnr.hpp
 * @brief Equal-SNR solvers: exact two-station closed form, opposite-phase and
 * random-phase heuristics for zero-forcing relaying, phase-aligned and
 * identical-b heuristics for network-coded relaying.
 *
 * All solvers return designs where every station sees the same
 * post-processing noise power and the relay spends exactly its power budget.
 */
#ifndef MIMOSWITCH_EQSNR_HPP
#define MIMOSWITCH_EQSNR_HPP

#include "mimoswitch/model.hpp"

namespace mimoswitch {

class BracketFailureError : public std::runtime_error {
 public:
  BracketFailureError()
      : std::runtime_error(
            "relay power never reaches the budget in the search range") {}
};

class PairingAbsentError : public std::runtime_error {
 public:
  PairingAbsentError()
      : std::runtime_error(
            "switch pattern is not a pairwise involutive derangement") {}
};

struct PhaseSearchConfig {
  int bins = 8;    // M: phase quantization of [0, 2pi)
  int trials = 1;  // L: random candidates
  std::uint64_t rng_seed = 0;
  // Also search per-element phases of b in pnc_identical_b. Off by default:
  // the identical-b constraint keeps b a single real scalar.
  bool per_element_b_phases = false;
};

struct EpsSearchConfig {
  double bracket_growth = 2.0;  // geometric bracket expansion factor
  double power_tol = 1e-10;     // relative tolerance on |power - p|
  int max_iterations = 400;
};

// Given fixed gain phases (and self-interference gains b for PNC), finds the
// smallest equal noise power eps whose induced amplitudes consume exactly the
// relay budget. The amplitudes follow |a_i|^2 = sigma^2 / (eps + 1 - q_i)
// with q_i = R_ii(b).
SolveOutcome solve_eps_given_phases(const ChannelRealization& ch,
                                    const SwitchSpec& sw,
                                    const NoiseParams& np,
                                    const RVector& phases, const CVector& b,
                                    const EpsSearchConfig& cfg = {});

// Exact N=2 solution: opposite real signs, largest real root of the
// biquartic in a_1^2.
SolveOutcome closed_form_two_station(const ChannelRealization& ch,
                                     const SwitchSpec& sw,
                                     const NoiseParams& np);

// Pairwise pattern, opposite phases within each pair, zero across pairs.
SolveOutcome opposite_phase(const ChannelRealization& ch, const SwitchSpec& sw,
                            const NoiseParams& np);

// Best of L random phase assignments drawn from M bins.
SolveOutcome random_phase(const ChannelRealization& ch, const SwitchSpec& sw,
                          const NoiseParams& np,
                          const PhaseSearchConfig& cfg);

// Self-interference gains cancelling the cross coupling inside each pair:
// b_p = -h2*/h1, b_k = -h2/h3. Throws PairingAbsentError without pairs.
CVector pair_cancelling_b(const ChannelRealization& ch, const SwitchSpec& sw);

// PNC pairwise solver: the pair-cancelling b with aligned phases.
SolveOutcome pnc_phase_aligned(const ChannelRealization& ch,
                               const SwitchSpec& sw, const NoiseParams& np);

// PNC solver with B = b I, b real, searched over a grid; phases as in
// random_phase. With 0 in the grid it never loses to random_phase.
SolveOutcome pnc_identical_b(const ChannelRealization& ch,
                             const SwitchSpec& sw, const NoiseParams& np,
                             const PhaseSearchConfig& cfg,
                             const RVector& b_grid);

RVector default_b_grid();  // 41 points uniform on [-2, 2]

// Deterministic phase candidates shared by random_phase and pnc_identical_b.
std::vector<RVector> phase_candidates(int n, const PhaseSearchConfig& cfg);

}  // namespace mimoswitch

#endif
