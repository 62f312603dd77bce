#pragma once

#include <vector>

#include <omp.h>

#include "flagstat/errors.hpp"

namespace flagstat {

enum class Execution { Serial, Parallel };

/// Thread count for parallel replicate loops: `requested` when positive,
/// otherwise FLAGSTAT_THREADS when set to a positive value, otherwise the
/// OpenMP default.
int resolve_threads(int requested);

namespace detail {

// Domain and numeric failures abort a single replicate, never the run.
template <class Body>
char run_one(Body& body, long k) {
  try {
    body(k);
    return 1;
  } catch (const DomainError&) {
    return 0;
  } catch (const NumericError&) {
    return 0;
  }
}

}  // namespace detail

/// Reference loop: replicates 0..reps-1 in order on the calling thread.
/// Returns one success flag per replicate.
template <class Body>
std::vector<char> run_replicates_serial(long reps, Body&& body) {
  std::vector<char> ok(static_cast<std::size_t>(reps), 0);
  for (long k = 0; k < reps; ++k) ok[static_cast<std::size_t>(k)] = detail::run_one(body, k);
  return ok;
}

/// OpenMP loop over replicates. `body(k)` must write only to slot k of its
/// outputs and draw randomness only from the stream of replicate k; then the
/// result is bit-identical to run_replicates_serial for any thread count.
template <class Body>
std::vector<char> run_replicates_parallel(long reps, int threads, Body&& body) {
  std::vector<char> ok(static_cast<std::size_t>(reps), 0);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (long k = 0; k < reps; ++k) ok[static_cast<std::size_t>(k)] = detail::run_one(body, k);
  return ok;
}

template <class Body>
std::vector<char> run_replicates(long reps, Execution execution, int threads, Body&& body) {
  if (execution == Execution::Serial) return run_replicates_serial(reps, body);
  return run_replicates_parallel(reps, resolve_threads(threads), body);
}

}  // namespace flagstat
