#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "flagstat/inference.hpp"
#include "flagstat/replicate_kernel.hpp"

namespace flagstat {

struct McConfig {
  CovModel model;
  long n = 10000;
  long reps = 2000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  Denominator denominator = Denominator::N;
  Execution execution = Execution::Parallel;
  int threads = 0;  // 0: FLAGSTAT_THREADS or OpenMP default
};

/// Model with eigenvector matrix Γ drawn from Haar measure with `gamma_seed`.
CovModel seeded_model(std::vector<double> lambdas, const FlagType& type, std::uint64_t gamma_seed);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<long> counts;
  long overflow = 0;          // samples at or beyond the last edge
};

struct McResult {
  std::vector<double> statistics;  // successful replicates, in replicate order
  std::vector<long> replicate_index;
  long truncation_count = 0;       // replicates with at least one truncated block
  long aborted = 0;                // replicates lost to domain errors
  int dof = 0;
  std::optional<double> ks_distance;
  double coverage = 0.0;           // fraction with T̂_n ≤ χ²_D(1 − α)
  double mean = 0.0;
  double variance = 0.0;
  Histogram histogram;
};

/// n iid rows N(0, Σ), row k being Γ Δ^{1/2} z_k with z_k standard normal.
Matrix sample_gaussian(const CovModel& model, long n, Rng& rng);

/// Pivotal statistic over cfg.reps independent replicates against the model's Γ.
McResult replicate_pivotal(const McConfig& cfg, int bins = 50);

/// sup_x |F_emp(x) − F_{χ²_dof}(x)|. Throws DomainError for empty input.
double ks_distance(std::span<const double> samples, int dof);
/// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Histogram over [0, χ²_dof(0.999)] (or [0, 1] when dof = 0).
Histogram make_histogram(std::span<const double> samples, int dof, int bins = 50);

struct CoverageResult {
  double coverage = 0.0;
  long covered = 0;
  long evaluated = 0;
  long aborted = 0;
};

/// Fraction of replicates whose confidence region contains F^I(Σ).
CoverageResult coverage_rate(const McConfig& cfg);

struct CltCheck {
  double var_f = 0.0;  // entries of F_n^(i,j)
  double var_u = 0.0;  // entries of U_n^(i,j)
  double var_g = 0.0;  // entries of block (i,j) of G_n^i
  double sigma2 = 0.0; // λ_iλ_j / (λ_i − λ_j)²
  double s2 = 0.0;     // λ_iλ_j
  long evaluated = 0;
  long aborted = 0;
  long truncated = 0;
};

/// Empirical entry variances of the off-diagonal Anderson blocks (i ≠ j).
CltCheck clt_block_check(const McConfig& cfg, int i, int j);

struct HaarCheck {
  std::vector<double> entry_ks;  // per entry of H_n^i vs conditional Haar, row-major
  double trace_ks = 0.0;
  double reference_entry_ks = 0.0;  // max entrywise KS between two reference samples
  double reference_trace_ks = 0.0;
  double positive_frequency = 0.0;  // fraction of H_n^i with positive diagonal
  double max_orthogonality_error = 0.0;
  long truncated = 0;
  long evaluated = 0;
  long aborted = 0;
};

/// Compares H_n^i draws against draws from the conditional Haar law on O(q_i).
HaarCheck haar_check(const McConfig& cfg, int i);

nlohmann::json mc_result_to_json(const McResult& result, const McConfig& cfg);
/// bin_left,bin_right,count,chi2_density_at_midpoint
void write_histogram_csv(std::ostream& out, const Histogram& hist, int dof);

}  // namespace flagstat
