#include <chrono>
#include <cstdio>
#include <functional>

#include "bec/certify.hpp"
#include "bec/excitation.hpp"
#include "bec/lab.hpp"
#include "bec/plant.hpp"

// Times the parallel window scans against their serial references on a short
// run of the built-in scenario. Both variants are exercised by the tests for
// equality; this target reports wall-clock ratios.

namespace {

double time_seconds(const std::function<void()>& fn, int reps) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const std::chrono::duration<double> d =
      std::chrono::steady_clock::now() - start;
  return d.count() / reps;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-18s serial %8.4f s   parallel %8.4f s   speedup %.2fx\n",
              name, serial, parallel, serial / parallel);
}

} // namespace

int main() {
  auto cfg = bec::lab::paper_scenario();
  cfg.sim.horizon = 30.0;
  cfg.analyses = {};
  const auto log = bec::plant::integrate(cfg.sim);

  const auto sigs = bec::lab::filtered_regressor_signals(log);
  report("pe_scan",
         time_seconds([&] { bec::excitation::check_pe_serial(sigs[0], 8.0); },
                      3),
         time_seconds([&] { bec::excitation::check_pe(sigs[0], 8.0); }, 3));

  report("fig6_scan",
         time_seconds(
             [&] { bec::lab::fig6_scan_serial(cfg.sim.sched, 4.0, 0.01); }, 3),
         time_seconds([&] { bec::lab::fig6_scan(cfg.sim.sched, 4.0, 0.01); },
                      3));

  const auto constants = bec::certify::theorem_constants(
      log, cfg.sim.sched, cfg.T_joint, cfg.sim.gains.sigma,
      cfg.sim.gains.mu_IF, cfg.Tbar);
  report("lyapunov_series",
         time_seconds(
             [&] {
               bec::certify::lyapunov_series_serial(
                   log, cfg.sim.sched, cfg.T_joint, cfg.sim.gains.lambda,
                   constants.pi_const, constants.delta_T);
             },
             3),
         time_seconds(
             [&] {
               bec::certify::lyapunov_series(
                   log, cfg.sim.sched, cfg.T_joint, cfg.sim.gains.lambda,
                   constants.pi_const, constants.delta_T);
             },
             3));
  return 0;
}
