/**
 * @file sim.hpp
 * @brief Monte Carlo throughput sweeps over random channels: scheme registry,
 * deterministic seeding, OpenMP-parallel driver with a serial reference
 * implementation, and CSV/JSON result writers.
 */
#ifndef MIMOSWITCH_SIM_HPP
#define MIMOSWITCH_SIM_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mimoswitch/eqsnr.hpp"
#include "mimoswitch/maxmin.hpp"
#include "mimoswitch/model.hpp"

namespace mimoswitch {

enum class Scheme {
  Basic,             // uniform real gains, full power
  ClosedForm2,       // exact two-station equal-SNR solution
  OppositePhase,     // opposite phases within pairs
  RandomPhase,       // best of L random phase draws
  PncPhaseAligned,   // network coding, pair-wise cross cancellation
  PncIdenticalB,     // network coding, B = b I grid search
  MaxminExhaustive2, // exhaustive N=2 grid baseline
  MaxminSdr,         // SDR + randomization maxmin
  SdrUpper,          // unrounded relaxation upper bound
  PncSdr,            // alternating A/B optimization
};

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);  // throws on unknown name
std::vector<Scheme> all_schemes();

struct SimConfig {
  int n = 2;                           // number of stations
  std::vector<int> pattern;            // permutation; empty means pairwise
  std::vector<double> snr_points_db = {0.0, 5.0, 10.0, 15.0};
  int channels = 1000;                 // default channel count per SNR point
  std::map<Scheme, int> channel_override;  // per-scheme channel counts
  std::vector<Scheme> schemes;
  std::uint64_t master_seed = 1;
  PhaseSearchConfig phase;
  SdrConfig sdr;
  IterativeConfig pnc_iter;
  double condition_cap = kDefaultConditionCap;
  int threads = 0;  // 0 = OpenMP default
};

struct SweepCell {
  Scheme scheme;
  double snr_db;
  double mean_throughput;   // channel average of the worst-station throughput
  double stderr_throughput; // standard error of that average
  int channels;
  long rejected;            // ill-conditioned channel draws discarded
};

struct SweepResult {
  std::vector<SweepCell> cells;
  SimConfig config;

  // Lookup helper; throws if the cell is absent.
  const SweepCell& at(Scheme s, double snr_db) const;
};

// SNR sweep convention: sigma^2 = gamma^2 = 10^(-snr_db/10), p = 1.
NoiseParams noise_from_snr_db(double snr_db);

// Channel seeds depend only on (master_seed, snr index, channel index), so
// every scheme at one SNR point sees the same channel draws.
SweepResult run_sweep(const SimConfig& cfg, bool parallel = true);

// Serial reference path, bit-identical to run_sweep.
SweepResult run_sweep_serial(const SimConfig& cfg);

// Dispatches a single channel realization to one scheme's solver and returns
// the worst-station throughput (for SdrUpper, the bound itself).
double evaluate_scheme(Scheme s, const ChannelRealization& ch,
                       const SwitchSpec& sw, const NoiseParams& np,
                       const SimConfig& cfg, std::uint64_t seed);

void write_csv(const SweepResult& result, std::ostream& os);
void write_json(const SweepResult& result, std::ostream& os);

// Delta(%) = (comparison - baseline)/baseline * 100, one entry per SNR point
// (in sweep order). Throws if either scheme is missing at any point.
std::vector<double> gap_table(const SweepResult& result, Scheme baseline,
                              Scheme comparison);

// Formatted schemes-by-SNR table of mean throughputs.
std::string format_table(const SweepResult& result);

}  // namespace mimoswitch

#endif
