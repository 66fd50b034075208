/**
 * @file mimoswitch_cli.cpp
 * @brief Command-line front end: table1/table2 reproduction, configurable
 * sweeps, single-channel solves, and a self-check command.
 *
 * Exit codes: 0 success, 1 configuration error, 2 numerical failure.
 */
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mimoswitch/sim.hpp"

namespace ms = mimoswitch;
using nlohmann::json;

namespace {

struct Options {
  ms::SimConfig sim;
  std::string out_dir;
  std::string format = "csv";
  std::vector<std::string> scheme_names;
  std::string pattern = "pairwise";
  int sdr_channels = -1;  // cap for SDR-backed schemes; -1 = same as channels
};

int config_error(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 1;
}

std::string scheme_list() {
  std::string s;
  for (ms::Scheme sch : ms::all_schemes()) {
    if (!s.empty()) s += ", ";
    s += ms::scheme_name(sch);
  }
  return s;
}

// Applies a JSON config file; command-line flags override afterwards.
void load_config(const std::string& path, Options& o) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j = json::parse(in);
  if (j.contains("n")) o.sim.n = j["n"];
  if (j.contains("seed")) o.sim.master_seed = j["seed"];
  if (j.contains("channels")) o.sim.channels = j["channels"];
  if (j.contains("sdr_channels")) o.sdr_channels = j["sdr_channels"];
  if (j.contains("snr_db")) o.sim.snr_points_db = j["snr_db"].get<std::vector<double>>();
  if (j.contains("pattern")) o.pattern = j["pattern"];
  if (j.contains("schemes")) o.scheme_names = j["schemes"].get<std::vector<std::string>>();
  if (j.contains("format")) o.format = j["format"];
  if (j.contains("out")) o.out_dir = j["out"];
  if (j.contains("threads")) o.sim.threads = j["threads"];
}

void finish_options(Options& o) {
  if (o.pattern == "pairwise") {
    o.sim.pattern.clear();
  } else if (o.pattern == "nonpairwise") {
    if (o.sim.n != 4)
      throw std::invalid_argument("nonpairwise pattern requires --n 4");
    o.sim.pattern = {2, 0, 3, 1};
  } else {
    throw std::invalid_argument("unknown pattern (use pairwise|nonpairwise)");
  }
  o.sim.schemes.clear();
  for (const std::string& name : o.scheme_names)
    o.sim.schemes.push_back(ms::scheme_from_name(name));
  if (o.out_dir.empty()) {
    const char* env = std::getenv("MIMOSWITCH_OUT");
    o.out_dir = env ? env : ".";
  }
  if (o.sdr_channels > 0)
    for (ms::Scheme s : {ms::Scheme::MaxminSdr, ms::Scheme::SdrUpper,
                         ms::Scheme::PncSdr})
      o.sim.channel_override[s] = std::min(o.sdr_channels, o.sim.channels);
}

std::uint64_t config_hash(const ms::SimConfig& cfg) {
  std::ostringstream os;
  ms::SweepResult empty;
  empty.config = cfg;
  ms::write_json(empty, os);
  return std::hash<std::string>{}(os.str());
}

void persist(const ms::SweepResult& result, const Options& o,
             const std::string& stem) {
  std::filesystem::create_directories(o.out_dir);
  std::filesystem::path base = std::filesystem::path(o.out_dir) / stem;
  if (o.format == "csv" || o.format == "both") {
    std::ofstream csv(base.string() + ".csv");
    ms::write_csv(result, csv);
  }
  std::ofstream js(base.string() + ".json");
  std::ostringstream body;
  ms::write_json(result, body);
  json j = json::parse(body.str());
  j["provenance"] = {{"seed", result.config.master_seed},
                     {"config_hash", config_hash(result.config)}};
  js << j.dump(2) << "\n";
  std::cout << "wrote " << base.string() << ".{csv,json}\n";
}

// Table-shaped CSV: one row per SNR, six value columns mirroring the
// equal-SNR heuristic / maxmin reference / SDR / PNC layout.
void persist_table(const ms::SweepResult& r, const Options& o,
                   const std::string& stem,
                   const std::vector<ms::Scheme>& cols, ms::Scheme baseline,
                   ms::Scheme reference) {
  std::filesystem::create_directories(o.out_dir);
  std::filesystem::path path =
      std::filesystem::path(o.out_dir) / (stem + ".csv");
  std::ofstream csv(path);
  csv << "snr_db";
  for (ms::Scheme s : cols) csv << "," << ms::scheme_name(s);
  csv << ",delta_pct\n";
  std::vector<double> deltas = ms::gap_table(r, baseline, reference);
  char buf[64];
  for (std::size_t i = 0; i < r.config.snr_points_db.size(); ++i) {
    double snr = r.config.snr_points_db[i];
    csv << snr;
    for (ms::Scheme s : cols) {
      std::snprintf(buf, sizeof buf, ",%.6f", r.at(s, snr).mean_throughput);
      csv << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.4f\n", deltas[i]);
    csv << buf;
  }
  persist(r, o, stem);  // long-format CSV/JSON provenance alongside
  std::cout << ms::format_table(r);
}

int cmd_table(int which, Options o) {
  if (which == 1) {
    o.sim.n = 2;
    o.sim.pattern.clear();
    o.sim.schemes = {ms::Scheme::OppositePhase, ms::Scheme::ClosedForm2,
                     ms::Scheme::MaxminExhaustive2, ms::Scheme::MaxminSdr,
                     ms::Scheme::PncPhaseAligned, ms::Scheme::PncSdr};
    persist_table(ms::run_sweep(o.sim), o, "table1",
                  {ms::Scheme::OppositePhase, ms::Scheme::ClosedForm2,
                   ms::Scheme::MaxminExhaustive2, ms::Scheme::MaxminSdr,
                   ms::Scheme::PncPhaseAligned, ms::Scheme::PncSdr},
                  ms::Scheme::OppositePhase, ms::Scheme::MaxminExhaustive2);
  } else {
    o.sim.n = 4;
    o.sim.pattern.clear();
    o.sim.schemes = {ms::Scheme::OppositePhase, ms::Scheme::RandomPhase,
                     ms::Scheme::MaxminSdr, ms::Scheme::SdrUpper,
                     ms::Scheme::PncPhaseAligned, ms::Scheme::PncSdr};
    persist_table(ms::run_sweep(o.sim), o, "table2",
                  {ms::Scheme::OppositePhase, ms::Scheme::RandomPhase,
                   ms::Scheme::MaxminSdr, ms::Scheme::SdrUpper,
                   ms::Scheme::PncPhaseAligned, ms::Scheme::PncSdr},
                  ms::Scheme::OppositePhase, ms::Scheme::MaxminSdr);
  }
  return 0;
}

int cmd_sweep(Options o) {
  if (o.sim.schemes.empty())
    return config_error("sweep needs --schemes; valid: " + scheme_list());
  persist(ms::run_sweep(o.sim), o, "sweep");
  return 0;
}

int cmd_single(Options o) {
  ms::ChannelRealization ch = ms::sample_channel(
      o.sim.n, ms::derive_seed(o.sim.master_seed, 0x73696e676c65ull, 0),
      o.sim.condition_cap);
  if (o.sim.schemes.empty()) o.sim.schemes = ms::all_schemes();
  std::cout << "channel condition rejections: " << ch.rejections << "\n";
  for (double snr : o.sim.snr_points_db) {
    ms::NoiseParams np = ms::noise_from_snr_db(snr);
    std::cout << "SNR " << snr << " dB\n";
    for (ms::Scheme s : o.sim.schemes) {
      if ((s == ms::Scheme::ClosedForm2 || s == ms::Scheme::MaxminExhaustive2)
          && o.sim.n != 2)
        continue;
      bool pnc = s == ms::Scheme::PncPhaseAligned ||
                 s == ms::Scheme::PncIdenticalB || s == ms::Scheme::PncSdr;
      ms::SwitchSpec sw = o.sim.pattern.empty()
          ? ms::SwitchSpec::pairwise(o.sim.n, pnc)
          : ms::SwitchSpec::from_permutation(o.sim.pattern, pnc);
      double t =
          ms::evaluate_scheme(s, ch, sw, np, o.sim, o.sim.master_seed);
      char buf[96];
      std::snprintf(buf, sizeof buf, "  %-20s %.6f bits/symbol\n",
                    ms::scheme_name(s).c_str(), t);
      std::cout << buf;
    }
  }
  return 0;
}

// ---- verify: invariant suites over random instances ----

struct Suite {
  std::string name;
  bool passed;
  std::string detail;
};

void report(std::vector<Suite>& suites, const std::string& name, bool ok,
            const std::string& detail) {
  suites.push_back({name, ok, detail});
}

int cmd_verify(std::uint64_t seed, bool inject_fault) {
  std::vector<Suite> suites;
  char buf[128];

  // Precoder identity over random designs.
  {
    double worst = 0.0;
    int idx = 0;
    for (int n : {2, 4})
      for (int pnc = 0; pnc <= 1; ++pnc)
        for (int t = 0; t < 25; ++t) {
          ms::ChannelRealization ch = ms::sample_channel(
              n, ms::derive_seed(seed, 0x766601, idx));
          ms::SwitchSpec sw = ms::SwitchSpec::pairwise(n, pnc != 0);
          ms::CscgSampler rng(ms::derive_seed(seed, 0x766602, idx++));
          ms::CVector a(n), b(n);
          for (int i = 0; i < n; ++i) {
            a(i) = rng.next();
            b(i) = pnc ? rng.next() : ms::Complex(0.0);
          }
          ms::CMatrix g = ms::assemble_precoder(ch, sw, a, b);
          ms::CMatrix target = a.asDiagonal() *
              (sw.P.cast<ms::Complex>() + ms::CMatrix(b.asDiagonal()));
          double rel = (ch.H.transpose() * g * ch.H - target).norm() /
                       target.norm();
          worst = std::max(worst, rel);
        }
    std::snprintf(buf, sizeof buf, "max relative mismatch %.2e", worst);
    report(suites, "precoder-identity", worst <= 1e-9, buf);
  }

  // Power equality (Lemma 1) and equal-noise spread across solvers.
  {
    double worst_pow = 0.0, worst_spread = 0.0;
    for (int t = 0; t < 40; ++t) {
      ms::ChannelRealization ch =
          ms::sample_channel(2, ms::derive_seed(seed, 0x766603, t));
      ms::NoiseParams np = ms::noise_from_snr_db(10.0);
      ms::SwitchSpec sw = ms::SwitchSpec::pairwise(2, false);
      ms::SwitchSpec swp = ms::SwitchSpec::pairwise(2, true);
      for (const ms::SolveOutcome& out :
           {ms::opposite_phase(ch, sw, np),
            ms::closed_form_two_station(ch, sw, np),
            ms::pnc_phase_aligned(ch, swp, np)}) {
        worst_pow = std::max(worst_pow, std::abs(out.power_used - np.p) / np.p);
        double spread = out.epsilon.maxCoeff() - out.epsilon.minCoeff();
        worst_spread =
            std::max(worst_spread, spread / out.epsilon.mean());
      }
    }
    std::snprintf(buf, sizeof buf, "max power error %.2e, eps spread %.2e",
                  worst_pow, worst_spread);
    report(suites, "power-equality", worst_pow <= 1e-6, buf);
    report(suites, "equal-noise-spread", worst_spread <= 1e-8, buf);
  }

  // Relaxation ordering: relaxation value <= rounded power; upper bound
  // dominates achieved throughput.
  {
    bool ok = true;
    for (int t = 0; t < 10; ++t) {
      ms::ChannelRealization ch =
          ms::sample_channel(2, ms::derive_seed(seed, 0x766604, t));
      ms::NoiseParams np = ms::noise_from_snr_db(10.0);
      ms::SwitchSpec sw = ms::SwitchSpec::pairwise(2, false);
      ms::SdrConfig cfg;
      cfg.rng_seed = ms::derive_seed(seed, 0x766605, t);
      ms::SolveOutcome out = ms::maxmin_solve(ch, sw, np, cfg);
      double ub = ms::sdr_upper_bound(ch, sw, np, cfg);
      if (out.diagnostics.sdp_lower_bound > np.p * (1.0 + 1e-5)) ok = false;
      if (ub < out.min_throughput() * (1.0 - 1e-7)) ok = false;
    }
    report(suites, "relaxation-ordering", ok, ok ? "no violations" : "violated");
  }

  // Closed form vs phase grid oracle.
  {
    bool ok = true;
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      ms::ChannelRealization ch =
          ms::sample_channel(2, ms::derive_seed(seed, 0x766606, t));
      ms::NoiseParams np = ms::noise_from_snr_db(10.0);
      ms::SwitchSpec sw = ms::SwitchSpec::pairwise(2, false);
      double eps_cf = ms::closed_form_two_station(ch, sw, np).max_epsilon();
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
          ms::RVector ph(2);
          ph << 2 * M_PI * i / 32, 2 * M_PI * j / 32;
          best = std::min(best, ms::solve_eps_given_phases(
                                    ch, sw, np, ph, ms::CVector::Zero(2))
                                    .max_epsilon());
        }
      worst = std::max(worst, (eps_cf - best) / best);
      if (eps_cf > best * 1.005) ok = false;
    }
    std::snprintf(buf, sizeof buf, "max closed-form excess %.2e", worst);
    report(suites, "quartic-vs-grid", ok, buf);
  }

  // PSD structure of the power quadratic.
  {
    bool ok = true;
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      ms::ChannelRealization ch =
          ms::sample_channel(4, ms::derive_seed(seed, 0x766607, t));
      ms::NoiseParams np = ms::noise_from_snr_db(5.0);
      ms::SwitchSpec sw = ms::SwitchSpec::pairwise(4, false);
      ms::CMatrix s = ms::compute_S(ch, sw, np);
      if (inject_fault) s(0, 1) += ms::Complex(0.0, 0.5);  // break Hermitianity
      double herm = (s - s.adjoint()).norm() / (1.0 + s.norm());
      worst = std::max(worst, herm);
      if (herm > 1e-12) {
        ok = false;
        continue;
      }
      if (!ms::psd_check(s).psd) ok = false;
    }
    std::snprintf(buf, sizeof buf, "max Hermitian defect %.2e", worst);
    report(suites, "psd-structure", ok, buf);
  }

  bool all = true;
  for (const Suite& s : suites) {
    std::cout << (s.passed ? "PASS" : "FAIL") << "  " << s.name << "  ("
              << s.detail << ")\n";
    all &= s.passed;
  }
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO switch relay precoder designer and simulator"};
  app.require_subcommand(1);

  Options o;
  o.sim.schemes.clear();
  std::string config_path;
  std::string snr_csv, schemes_csv;
  bool inject_fault = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--seed", o.sim.master_seed, "master RNG seed");
    cmd->add_option("--channels", o.sim.channels, "channels per SNR point");
    cmd->add_option("--sdr-channels", o.sdr_channels,
                    "channel cap for SDR-backed schemes");
    cmd->add_option("--snr", snr_csv, "comma-separated SNR list in dB");
    cmd->add_option("--pattern", o.pattern, "pairwise|nonpairwise");
    cmd->add_option("--schemes", schemes_csv, "comma-separated scheme list");
    cmd->add_option("--n", o.sim.n, "number of stations");
    cmd->add_option("--out", o.out_dir, "output directory ($MIMOSWITCH_OUT)");
    cmd->add_option("--format", o.format, "csv|json|both");
    cmd->add_option("--threads", o.sim.threads, "worker cap (0 = default)");
  };

  CLI::App* t1 = app.add_subcommand("table1", "two-station throughput table");
  CLI::App* t2 = app.add_subcommand("table2", "four-station throughput table");
  CLI::App* sw = app.add_subcommand("sweep", "configurable SNR sweep");
  CLI::App* sg = app.add_subcommand("single", "solve one sampled channel");
  CLI::App* vf = app.add_subcommand("verify", "run the invariant suites");
  for (CLI::App* c : {t1, t2, sw, sg}) add_common(c);
  vf->add_option("--seed", o.sim.master_seed, "master RNG seed");
  vf->add_flag("--inject-fault", inject_fault)->group("");  // hidden

  // Modest defaults so the tables finish quickly; raise for tight error bars.
  o.sim.channels = 500;
  o.sdr_channels = 50;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!config_path.empty()) load_config(config_path, o);
    auto split = [](const std::string& s) {
      std::vector<std::string> out;
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ',')) out.push_back(tok);
      return out;
    };
    if (!snr_csv.empty()) {
      o.sim.snr_points_db.clear();
      for (const std::string& t : split(snr_csv))
        o.sim.snr_points_db.push_back(std::stod(t));
    }
    if (!schemes_csv.empty()) o.scheme_names = split(schemes_csv);
    finish_options(o);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    if (msg.find("scheme") != std::string::npos)
      msg += "; valid schemes: " + scheme_list();
    return config_error(msg);
  }

  try {
    if (t1->parsed()) return cmd_table(1, o);
    if (t2->parsed()) return cmd_table(2, o);
    if (sw->parsed()) return cmd_sweep(o);
    if (sg->parsed()) return cmd_single(o);
    if (vf->parsed()) return cmd_verify(o.sim.master_seed, inject_fault);
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
