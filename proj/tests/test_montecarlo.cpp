#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

using namespace flagstat;
using namespace flagstat::testing;

namespace {

McConfig small_config(long reps, std::uint64_t seed) {
  McConfig cfg{seeded_model({8, 4, 2, 1}, FlagType({1, 1, 1, 1}), 3)};
  cfg.n = 2000;
  cfg.reps = reps;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("serial and parallel loops give bit-identical results") {
  McConfig cfg = small_config(64, 5);
  cfg.execution = Execution::Serial;
  const McResult serial = replicate_pivotal(cfg);
  for (int threads : {1, 2, 3, 7}) {
    cfg.execution = Execution::Parallel;
    cfg.threads = threads;
    const McResult parallel = replicate_pivotal(cfg);
    CHECK(parallel.statistics == serial.statistics);
    CHECK(parallel.replicate_index == serial.replicate_index);
    CHECK(parallel.histogram.counts == serial.histogram.counts);
  }
  cfg.execution = Execution::Serial;
  const HaarCheck hs = haar_check(cfg, 1);
  cfg.execution = Execution::Parallel;
  cfg.threads = 3;
  const HaarCheck hp = haar_check(cfg, 1);
  CHECK(hs.entry_ks == hp.entry_ks);
  CHECK(hs.trace_ks == hp.trace_ks);
}

TEST_CASE("failing replicates are counted, not fatal") {
  std::vector<double> out(10, 0.0);
  const auto body = [&](long k) {
    if (k % 3 == 0) throw DomainError("odd");
    if (k == 4) throw NumericError("numeric");
    out[static_cast<std::size_t>(k)] = static_cast<double>(k);
  };
  const std::vector<char> serial = run_replicates_serial(10, body);
  const std::vector<char> parallel = run_replicates_parallel(10, 3, body);
  CHECK(serial == parallel);
  CHECK(std::count(serial.begin(), serial.end(), 0) == 5);
}

TEST_CASE("thread resolution honours FLAGSTAT_THREADS") {
  CHECK(resolve_threads(3) == 3);
  setenv("FLAGSTAT_THREADS", "5", 1);
  CHECK(resolve_threads(0) == 5);
  CHECK(resolve_threads(2) == 2);
  setenv("FLAGSTAT_THREADS", "0", 1);
  CHECK(resolve_threads(0) >= 1);
  unsetenv("FLAGSTAT_THREADS");
}

TEST_CASE("runs are reproducible from the seed") {
  const McResult a = replicate_pivotal(small_config(20, 9));
  const McResult b = replicate_pivotal(small_config(20, 9));
  const McResult c = replicate_pivotal(small_config(20, 10));
  CHECK(a.statistics == b.statistics);
  CHECK(a.statistics != c.statistics);
  CHECK(mc_result_to_json(a, small_config(20, 9)).dump() == mc_result_to_json(b, small_config(20, 9)).dump());
}

TEST_CASE("a single replicate has no KS distance") {
  const McResult r = replicate_pivotal(small_config(1, 2));
  CHECK(r.statistics.size() == 1);
  CHECK_FALSE(r.ks_distance.has_value());
  CHECK(mc_result_to_json(r, small_config(1, 2)).at("ks_distance").is_null());
}

TEST_CASE("sample_gaussian has the model covariance") {
  const CovModel model = seeded_model({5, 2, 1}, FlagType({1, 2, 1}), 4);
  Rng rng = replicate_stream(60, 0);
  const Matrix x = sample_gaussian(model, 200000, rng);
  CHECK((sample_covariance(x) - model.sigma()).norm() < 0.06);
}

TEST_CASE("KS distances") {
  std::vector<double> q;
  const int m = 200;
  for (int k = 0; k < m; ++k) q.push_back(chi2_quantile(3, (k + 0.5) / m));
  CHECK(ks_distance(q, 3) == doctest::Approx(0.5 / m).epsilon(1e-9));
  CHECK(ks_two_sample(q, q) == 0.0);
  const std::vector<double> a{1, 2, 3}, b{4, 5};
  CHECK(ks_two_sample(a, b) == 1.0);
  const std::vector<double> c{1, 3}, d{2, 4};
  CHECK(ks_two_sample(c, d) == doctest::Approx(0.5));
  CHECK_THROWS_AS(ks_distance(std::vector<double>{}, 3), DomainError);
}

TEST_CASE("histogram binning and CSV") {
  const std::vector<double> x{0.0, 0.1, 5.0, 100.0};
  const Histogram h = make_histogram(x, 2, 10);
  CHECK(h.edges.size() == 11);
  CHECK(h.edges.back() == doctest::Approx(chi2_quantile(2, 0.999)));
  CHECK(h.counts[0] == 2);
  CHECK(h.overflow == 1);
  long total = h.overflow;
  for (long c : h.counts) total += c;
  CHECK(total == 4);

  std::ostringstream csv;
  write_histogram_csv(csv, h, 2);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "bin_left,bin_right,count,chi2_density_at_midpoint");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 10);
  CHECK(make_histogram(x, 0, 4).edges.back() == 1.0);
}

TEST_CASE("coverage of a small run") {
  McConfig cfg = small_config(200, 11);
  const CoverageResult c = coverage_rate(cfg);
  CHECK(c.evaluated + c.aborted == 200);
  CHECK(c.coverage > 0.88);
  CHECK(c.coverage <= 1.0);
}

TEST_CASE("CLT block check reports the limiting variances") {
  const CltCheck c = clt_block_check(small_config(300, 12), 0, 1);
  CHECK(c.sigma2 == doctest::Approx(2.0));
  CHECK(c.s2 == doctest::Approx(32.0));
  CHECK(c.var_f / c.sigma2 == doctest::Approx(1.0).epsilon(0.25));
  CHECK(c.var_u / c.s2 == doctest::Approx(1.0).epsilon(0.25));
  CHECK_THROWS_AS(clt_block_check(small_config(3, 1), 1, 1), DomainError);
}

TEST_CASE("conditional Haar reference samples agree with each other") {
  McConfig cfg{seeded_model({4, 1}, FlagType({2, 2}), 14)};
  cfg.n = 500;
  cfg.reps = 2000;
  cfg.seed = 15;
  const HaarCheck h = haar_check(cfg, 0);
  CHECK(h.reference_entry_ks < 0.05);
  CHECK(h.reference_trace_ks < 0.05);
  CHECK(h.entry_ks.size() == 4);
  CHECK(h.max_orthogonality_error < 1e-12);
  CHECK(h.evaluated + h.aborted == 2000);
}

TEST_CASE("configuration validation") {
  McConfig cfg = small_config(10, 1);
  cfg.n = 1;
  CHECK_THROWS_AS(replicate_pivotal(cfg), DomainError);
  cfg = small_config(0, 1);
  CHECK_THROWS_AS(replicate_pivotal(cfg), DomainError);
}

}
