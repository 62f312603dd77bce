// Wall-clock comparison of the serial and OpenMP replicate loops on the
// pivotal-statistic workload. Usage: bench_replicates [reps] [n] [threads]
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "flagstat/montecarlo.hpp"

using namespace flagstat;

namespace {

double seconds(const McConfig& cfg, McResult& out) {
  const auto start = std::chrono::steady_clock::now();
  out = replicate_pivotal(cfg);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  const long reps = argc > 1 ? std::atol(argv[1]) : 400;
  const long n = argc > 2 ? std::atol(argv[2]) : 10000;
  const int threads = argc > 3 ? std::atoi(argv[3]) : 0;

  const FlagType type({1, 1, 1, 1});
  McConfig cfg{seeded_model({8, 4, 2, 1}, type, 7)};
  cfg.n = n;
  cfg.reps = reps;
  cfg.seed = 11;
  cfg.threads = threads;

  McResult serial, parallel;
  cfg.execution = Execution::Serial;
  const double ts = seconds(cfg, serial);
  cfg.execution = Execution::Parallel;
  const double tp = seconds(cfg, parallel);

  const bool identical = serial.statistics == parallel.statistics;
  std::printf("reps=%ld n=%ld threads=%d\n", reps, n, resolve_threads(threads));
  std::printf("serial   %8.3f s\n", ts);
  std::printf("parallel %8.3f s  speedup %.2fx\n", tp, ts / tp);
  std::printf("outputs %s\n", identical ? "identical" : "DIFFER");
  return identical ? 0 : 1;
}
