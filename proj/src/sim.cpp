#include "mimoswitch/sim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

namespace mimoswitch {

namespace {

const std::vector<std::pair<Scheme, const char*>> kSchemeNames = {
    {Scheme::Basic, "basic"},
    {Scheme::ClosedForm2, "closed-form-2"},
    {Scheme::OppositePhase, "opposite-phase"},
    {Scheme::RandomPhase, "random-phase"},
    {Scheme::PncPhaseAligned, "pnc-phase-aligned"},
    {Scheme::PncIdenticalB, "pnc-identical-b"},
    {Scheme::MaxminExhaustive2, "maxmin-exhaustive-2"},
    {Scheme::MaxminSdr, "maxmin-sdr"},
    {Scheme::SdrUpper, "sdr-upper"},
    {Scheme::PncSdr, "pnc-sdr"},
};

bool is_pnc(Scheme s) {
  return s == Scheme::PncPhaseAligned || s == Scheme::PncIdenticalB ||
         s == Scheme::PncSdr;
}

SwitchSpec make_switch(const SimConfig& cfg, Scheme s) {
  if (cfg.pattern.empty()) return SwitchSpec::pairwise(cfg.n, is_pnc(s));
  return SwitchSpec::from_permutation(cfg.pattern, is_pnc(s));
}

std::uint64_t channel_seed(const SimConfig& cfg, std::size_t snr_index,
                           int channel_index) {
  return derive_seed(cfg.master_seed, 0x6368616e6e656cull,
                     snr_index * 1000003ull + channel_index);
}

std::uint64_t solver_seed(const SimConfig& cfg, Scheme s,
                          std::size_t snr_index, int channel_index) {
  return derive_seed(cfg.master_seed,
                     0x736f6c766572ull + 0x9e37ull * (1 + (std::uint64_t)s),
                     snr_index * 1000003ull + channel_index);
}

int channels_for(const SimConfig& cfg, Scheme s) {
  auto it = cfg.channel_override.find(s);
  return it != cfg.channel_override.end() ? it->second : cfg.channels;
}

SweepResult run_impl(const SimConfig& cfg, bool parallel) {
  SweepResult result;
  result.config = cfg;
  std::vector<Scheme> schemes =
      cfg.schemes.empty() ? all_schemes() : cfg.schemes;

#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif

  for (Scheme s : schemes) {
    SwitchSpec sw = make_switch(cfg, s);
    for (std::size_t si = 0; si < cfg.snr_points_db.size(); ++si) {
      const NoiseParams np = noise_from_snr_db(cfg.snr_points_db[si]);
      const int nch = channels_for(cfg, s);
      std::vector<double> tput(nch);
      std::vector<long> rej(nch);

#pragma omp parallel for schedule(dynamic) if (parallel)
      for (int ci = 0; ci < nch; ++ci) {
        ChannelRealization ch =
            sample_channel(cfg.n, channel_seed(cfg, si, ci), cfg.condition_cap);
        rej[ci] = ch.rejections;
        tput[ci] = evaluate_scheme(s, ch, sw, np, cfg,
                                   solver_seed(cfg, s, si, ci));
      }

      // Sequential reduction keeps parallel and serial runs bit-identical.
      double mean = 0.0;
      long rejected = 0;
      for (int ci = 0; ci < nch; ++ci) {
        mean += tput[ci];
        rejected += rej[ci];
      }
      mean /= nch;
      double var = 0.0;
      for (int ci = 0; ci < nch; ++ci) {
        double d = tput[ci] - mean;
        var += d * d;
      }
      double se = nch > 1 ? std::sqrt(var / (nch - 1) / nch) : 0.0;
      result.cells.push_back(
          {s, cfg.snr_points_db[si], mean, se, nch, rejected});
    }
  }
  return result;
}

}  // namespace

std::string scheme_name(Scheme s) {
  for (const auto& [sch, name] : kSchemeNames)
    if (sch == s) return name;
  throw std::invalid_argument("unknown scheme");
}

Scheme scheme_from_name(const std::string& name) {
  for (const auto& [sch, n] : kSchemeNames)
    if (name == n) return sch;
  throw std::invalid_argument("unknown scheme name: " + name);
}

std::vector<Scheme> all_schemes() {
  std::vector<Scheme> out;
  for (const auto& [sch, name] : kSchemeNames) out.push_back(sch);
  return out;
}

NoiseParams noise_from_snr_db(double snr_db) {
  double v = std::pow(10.0, -snr_db / 10.0);
  return {v, v, 1.0};
}

const SweepCell& SweepResult::at(Scheme s, double snr_db) const {
  for (const SweepCell& c : cells)
    if (c.scheme == s && std::abs(c.snr_db - snr_db) < 1e-9) return c;
  throw std::out_of_range("no sweep cell for " + scheme_name(s));
}

double evaluate_scheme(Scheme s, const ChannelRealization& ch,
                       const SwitchSpec& sw, const NoiseParams& np,
                       const SimConfig& cfg, std::uint64_t seed) {
  switch (s) {
    case Scheme::Basic: {
      const int n = sw.size();
      CMatrix smat = compute_S(ch, sw, np);
      CVector ones = CVector::Ones(n);
      double beta =
          std::sqrt(np.p / std::real(Complex(ones.adjoint() * smat * ones)));
      return make_outcome(ch, sw, np, beta * ones, CVector::Zero(n))
          .min_throughput();
    }
    case Scheme::ClosedForm2:
      return closed_form_two_station(ch, sw, np).min_throughput();
    case Scheme::OppositePhase:
      return opposite_phase(ch, sw, np).min_throughput();
    case Scheme::RandomPhase: {
      PhaseSearchConfig pc = cfg.phase;
      pc.rng_seed = seed;
      return random_phase(ch, sw, np, pc).min_throughput();
    }
    case Scheme::PncPhaseAligned:
      return pnc_phase_aligned(ch, sw, np).min_throughput();
    case Scheme::PncIdenticalB: {
      PhaseSearchConfig pc = cfg.phase;
      pc.rng_seed = seed;
      return pnc_identical_b(ch, sw, np, pc, default_b_grid())
          .min_throughput();
    }
    case Scheme::MaxminExhaustive2:
      return maxmin_exhaustive_2(ch, sw, np).min_throughput();
    case Scheme::MaxminSdr: {
      SdrConfig sc = cfg.sdr;
      sc.rng_seed = seed;
      return maxmin_solve(ch, sw, np, sc).min_throughput();
    }
    case Scheme::SdrUpper: {
      SdrConfig sc = cfg.sdr;
      sc.rng_seed = seed;
      return sdr_upper_bound(ch, sw, np, sc);
    }
    case Scheme::PncSdr: {
      SdrConfig sc = cfg.sdr;
      sc.rng_seed = seed;
      return pnc_maxmin_iterate(ch, sw, np, cfg.pnc_iter, sc)
          .min_throughput();
    }
  }
  throw std::invalid_argument("unknown scheme");
}

SweepResult run_sweep(const SimConfig& cfg, bool parallel) {
  return run_impl(cfg, parallel);
}

SweepResult run_sweep_serial(const SimConfig& cfg) {
  return run_impl(cfg, false);
}

void write_csv(const SweepResult& result, std::ostream& os) {
  os << "scheme,snr_db,mean_tput,stderr,channels,rejected\n";
  char line[160];
  for (const SweepCell& c : result.cells) {
    std::snprintf(line, sizeof line, "%s,%.6g,%.10g,%.10g,%d,%ld\n",
                  scheme_name(c.scheme).c_str(), c.snr_db, c.mean_throughput,
                  c.stderr_throughput, c.channels, c.rejected);
    os << line;
  }
}

void write_json(const SweepResult& result, std::ostream& os) {
  nlohmann::json j;
  const SimConfig& cfg = result.config;
  std::vector<std::string> names;
  for (Scheme s : cfg.schemes.empty() ? all_schemes() : cfg.schemes)
    names.push_back(scheme_name(s));
  j["config"] = {{"n", cfg.n},
                 {"pattern", cfg.pattern},
                 {"snr_points_db", cfg.snr_points_db},
                 {"channels", cfg.channels},
                 {"schemes", names},
                 {"master_seed", cfg.master_seed}};
  j["cells"] = nlohmann::json::array();
  for (const SweepCell& c : result.cells)
    j["cells"].push_back({{"scheme", scheme_name(c.scheme)},
                          {"snr_db", c.snr_db},
                          {"mean_tput", c.mean_throughput},
                          {"stderr", c.stderr_throughput},
                          {"channels", c.channels},
                          {"rejected", c.rejected}});
  os << j.dump(2) << "\n";
}

std::vector<double> gap_table(const SweepResult& result, Scheme baseline,
                              Scheme comparison) {
  std::vector<double> deltas;
  for (double snr : result.config.snr_points_db) {
    double base = result.at(baseline, snr).mean_throughput;
    double comp = result.at(comparison, snr).mean_throughput;
    deltas.push_back((comp - base) / base * 100.0);
  }
  return deltas;
}

std::string format_table(const SweepResult& result) {
  std::vector<Scheme> schemes;
  std::vector<double> snrs;
  for (const SweepCell& c : result.cells) {
    bool have_s = false, have_v = false;
    for (Scheme s : schemes) have_s |= (s == c.scheme);
    for (double v : snrs) have_v |= (std::abs(v - c.snr_db) < 1e-9);
    if (!have_s) schemes.push_back(c.scheme);
    if (!have_v) snrs.push_back(c.snr_db);
  }

  std::ostringstream os;
  char buf[64];
  os << "scheme              ";
  for (double v : snrs) {
    std::snprintf(buf, sizeof buf, " %9.4g dB", v);
    os << buf;
  }
  os << "\n";
  for (Scheme s : schemes) {
    std::snprintf(buf, sizeof buf, "%-20s", scheme_name(s).c_str());
    os << buf;
    for (double v : snrs) {
      std::snprintf(buf, sizeof buf, " %12.4f", result.at(s, v).mean_throughput);
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace mimoswitch
