/**
 * @file bench_sweep.cpp
 * @brief Times the OpenMP sweep driver against the serial reference path and
 * checks that both produce identical results.
 */
#include <chrono>
#include <cstdio>
#include <cstring>

#include "mimoswitch/sim.hpp"

namespace ms = mimoswitch;

namespace {

double run_timed(const ms::SimConfig& cfg, bool parallel, ms::SweepResult& out) {
  auto t0 = std::chrono::steady_clock::now();
  out = parallel ? ms::run_sweep(cfg) : ms::run_sweep_serial(cfg);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  ms::SimConfig cfg;
  cfg.n = 2;
  cfg.channels = 2000;
  cfg.master_seed = 7;
  cfg.schemes = {ms::Scheme::OppositePhase, ms::Scheme::ClosedForm2,
                 ms::Scheme::PncPhaseAligned};
  for (int i = 1; i + 1 < argc; i += 2) {
    if (!std::strcmp(argv[i], "--channels")) cfg.channels = std::atoi(argv[i + 1]);
    if (!std::strcmp(argv[i], "--threads")) cfg.threads = std::atoi(argv[i + 1]);
  }

  ms::SweepResult par, ser;
  double tp = run_timed(cfg, true, par);
  double ts = run_timed(cfg, false, ser);

  bool identical = par.cells.size() == ser.cells.size();
  for (std::size_t i = 0; identical && i < par.cells.size(); ++i)
    identical = par.cells[i].mean_throughput == ser.cells[i].mean_throughput &&
                par.cells[i].stderr_throughput == ser.cells[i].stderr_throughput;

  std::printf("channels per point : %d\n", cfg.channels);
  std::printf("parallel sweep     : %.3f s\n", tp);
  std::printf("serial reference   : %.3f s\n", ts);
  std::printf("speedup            : %.2fx\n", ts / tp);
  std::printf("results identical  : %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
