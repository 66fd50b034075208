/**
 * @file model.hpp
 * @brief System model of the MIMO switch: channels, switch patterns, precoder
 * assembly, noise/power functionals and a signal-level round-trip simulator.
 *
 * Conventions: H is the N x N uplink channel, the downlink channel is H^T
 * (reciprocity). The relay precoder G realizes H^T G H = A (P + B) where A is
 * the diagonal amplification matrix and B the diagonal self-interference
 * matrix (zero without network coding).
 */
#ifndef MIMOSWITCH_MODEL_HPP
#define MIMOSWITCH_MODEL_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mimoswitch/numerics.hpp"

namespace mimoswitch {

struct NoiseParams {
  double gamma2;  // relay noise variance
  double sigma2;  // station noise variance
  double p;       // relay power budget
};

// Permutation switch pattern, optionally flagged for network coding. When the
// permutation is an involutive derangement the exchange pairs are recorded.
struct SwitchSpec {
  RMatrix P;
  bool pnc = false;
  std::optional<std::vector<std::pair<int, int>>> pairs;

  int size() const { return static_cast<int>(P.rows()); }

  // perm[i] = j means station i receives station j's symbol: (Px)_i = x_j.
  static SwitchSpec from_permutation(const std::vector<int>& perm,
                                     bool pnc = false);
  // Pairwise symmetric derangement: stations (0,N-1), (1,N-2), ...
  static SwitchSpec pairwise(int n, bool pnc = false);
  // The asymmetric 4-station derangement 0<-2, 1<-0, 2<-3, 3<-1.
  static SwitchSpec non_pairwise4(bool pnc = false);
};

struct ChannelRealization {
  CMatrix H;
  CMatrix Hinv;    // H^-1
  CMatrix W;       // (H^H H)^-1, Hermitian PSD
  CMatrix Wstar;   // (H^*)^-1 H^-T = conj(W)
  int rejections = 0;  // ill-conditioned draws discarded by sample_channel

  static ChannelRealization from_matrix(const CMatrix& h,
                                        double condition_cap = kDefaultConditionCap);
};

struct RelayDesign {
  CVector a;  // diag of A
  CVector b;  // diag of B, zero without network coding
  CMatrix G;
};

struct SolverDiagnostics {
  int iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int sdp_solves = 0;
  double sdp_lower_bound = 0.0;
};

struct SolveOutcome {
  RVector epsilon;     // post-processing noise power per station
  double power_used;   // relay transmit power
  RVector throughput;  // bits per symbol per station
  RelayDesign design;
  SolverDiagnostics diagnostics;

  double max_epsilon() const { return epsilon.maxCoeff(); }
  double min_throughput() const { return throughput.minCoeff(); }
};

// Deterministic i.i.d. CSCG(0,1) channel sampling; resamples (and counts)
// draws whose condition number exceeds the cap.
ChannelRealization sample_channel(int n, std::uint64_t rng_seed,
                                  double condition_cap = kDefaultConditionCap);

// Q = I + gamma^2 P W P^T  (noise enhancement of zero-forcing relaying).
CMatrix compute_Q(const ChannelRealization& ch, const SwitchSpec& sw,
                  const NoiseParams& np);

// s_ij = Q_ji [W^*]_ij; relay power is a^H S a.
CMatrix compute_S(const ChannelRealization& ch, const SwitchSpec& sw,
                  const NoiseParams& np);

// R = I + gamma^2 (P+B) W (P+B)^H; reduces to Q when b = 0.
CMatrix compute_R(const ChannelRealization& ch, const SwitchSpec& sw,
                  const NoiseParams& np, const CVector& b);

// Power quadratic form with self-interference folded in:
// s'_ij = [R + B P^T + P B^H + B B^H]_ji [W^*]_ij, so power = a^H S' a.
// Reduces to compute_S when b = 0.
CMatrix compute_power_matrix(const ChannelRealization& ch, const SwitchSpec& sw,
                             const NoiseParams& np, const CVector& b);

double relay_power(const ChannelRealization& ch, const SwitchSpec& sw,
                   const NoiseParams& np, const CVector& a, const CVector& b);

// G = H^-T A (P+B) H^-1.
CMatrix assemble_precoder(const ChannelRealization& ch, const SwitchSpec& sw,
                          const CVector& a, const CVector& b);

// eps_i = R_ii - 1 + sigma^2 / |a_i|^2. Throws on any a_i = 0.
RVector post_noise(const ChannelRealization& ch, const SwitchSpec& sw,
                   const NoiseParams& np, const CVector& a, const CVector& b);

// Half-duplex Gaussian-signaling throughput, 0.5 * log2(1 + 1/eps).
double throughput(double epsilon);

// Builds the full SolveOutcome (precoder, noise, throughput) for a gain pair.
SolveOutcome make_outcome(const ChannelRealization& ch, const SwitchSpec& sw,
                          const NoiseParams& np, const CVector& a,
                          const CVector& b);

struct RoundTripStats {
  RVector empirical_noise;  // per-station residual power after compensation
  double empirical_relay_power;
};

// Signal-level Monte Carlo: x -> y = Hx+u -> r = H^T G y + w, receivers divide
// by a_i and subtract b_i x_i, residual power is measured against (Px)_i.
RoundTripStats simulate_round(const ChannelRealization& ch,
                              const SwitchSpec& sw, const NoiseParams& np,
                              const RelayDesign& design, int n_symbols,
                              std::uint64_t rng_seed);

struct PairCoefficients {
  double h1;   // W_{pi,pi}
  Complex h2;  // W_{pi,ka}
  double h3;   // W_{ka,ka}
};

PairCoefficients pair_coefficients(const ChannelRealization& ch,
                                   std::pair<int, int> pair);

// Deterministic stream of CSCG(0,1) samples (Box-Muller over mt19937_64, so
// results are identical across standard library implementations).
class CscgSampler {
 public:
  explicit CscgSampler(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b9) {}
  Complex next();
  double next_uniform();  // in (0,1)

 private:
  std::uint64_t state_;
  std::uint64_t next_u64();
};

// splitmix64-style mixing for deterministic per-trial seed derivation.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index);

}  // namespace mimoswitch

#endif
