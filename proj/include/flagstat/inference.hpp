#pragma once

#include <string>
#include <vector>

#include "flagstat/flag.hpp"
#include "flagstat/stiefel.hpp"

namespace flagstat {

/// Ground-truth spectral model Σ = Γ Δ Γ' with Δ = Diag(λ_1 I_{q_1}, …, λ_r I_{q_r}).
struct CovModel {
  Matrix gamma;
  std::vector<double> lambdas;  // strictly decreasing, positive
  FlagType type;

  /// Validates Γ orthogonal and the eigenvalues strictly decreasing and positive.
  CovModel(Matrix gamma, std::vector<double> lambdas, FlagType type);

  Matrix delta() const;
  Matrix sigma() const;
};

enum class Denominator { N, NMinusOne };

/// Mean-centred sample covariance of the rows of `data` (n × d). Requires n >= 2.
Matrix sample_covariance(const Matrix& data, Denominator denominator = Denominator::N);

/// Sample eigenvalues and their per-block means.
struct SampleSpectrum {
  Matrix sigma_hat;
  long n = 0;
  Vector eigvals;                   // non-increasing
  std::vector<double> block_means;  // mean of eigvals over β_i

  static SampleSpectrum from(const Matrix& sigma_hat, long n, const FlagType& type);
};

/// T_n = Γ'Σ̂Γ, U_n = √n (T_n − Δ), E_n = ψ(T_n) and F_n = √n E_n.
struct AndersonStats {
  Matrix t;
  Matrix u;
  Matrix e;
  Matrix f;
  std::vector<Matrix> diagonal_blocks;  // E_n^(i,i)
};

/// Throws DomainError when T_n has repeated eigenvalues.
AndersonStats anderson_statistics(const Matrix& gamma, const Matrix& delta, const Matrix& sigma_hat, long n,
                                  const FlagType& type);

/// Singular-value threshold on E_n^(i,i) below which block i is truncated.
inline constexpr double kTruncationTol = 1e-8;

/// True when rank(E^(i,i)) < q_i, i.e. Γ'P_i(Σ̂)Γ ∈ Cut(P_0^i).
bool block_truncated(const Matrix& e, const FlagType& type, int i);

struct TangentStatistic {
  Matrix value;  // d × d, tangent at P_0^i
  bool truncated = false;
};

struct HolonomyStatistic {
  Matrix value;  // q_i × q_i, orthogonal
  bool truncated = false;
};

/// G_n^i = √n Log_{P_0^i}(Γ'P_i(Σ̂)Γ), or zero when truncated.
TangentStatistic g_statistic(const Matrix& gamma, const Matrix& sigma_hat, const FlagType& type, long n, int i);
/// Same, from a precomputed E_n = ψ(Γ'Σ̂Γ).
TangentStatistic g_statistic_from_e(const Matrix& e, const FlagType& type, long n, int i);

/// H_n^i: the β_i rows of the holonomy of E_n^(i) from Γ'P_i(Σ̂)Γ to P_0^i,
/// or I_{q_i} when truncated.
HolonomyStatistic h_statistic(const Matrix& gamma, const Matrix& sigma_hat, const FlagType& type, long n, int i);
HolonomyStatistic h_statistic_from_e(const Matrix& e, const FlagType& type, int i);

/// D^I = (d² − Σ q_i²) / 2.
int dof(const FlagType& type);

/// K̂^i with 1/σ̂_{i,j} on block j ≠ i, σ̂_{i,j} = √(λ̂_iλ̂_j)/|λ̂_i − λ̂_j|.
/// Throws DegenerateScalingError when block means are not strictly decreasing.
BlockScaling khat_scaling(const SampleSpectrum& spectrum, const FlagType& type);

struct PivotalReport {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::vector<bool> truncated;
  bool truncation_applied = false;
};

/// T̂_n = (n/4) Σ_i ‖K̂^i Log_{P_0^i}(Γ'P_i(Σ̂)Γ) K̂^i‖²_F over non-truncated blocks.
PivotalReport pivotal_statistic(const Matrix& gamma, const Matrix& sigma_hat, const FlagType& type, long n);
/// Same with Γ any representative of `reference`.
PivotalReport pivotal_statistic(const Flag& reference, const Matrix& sigma_hat, const FlagType& type, long n);

/// (n/4) D̃²_{K̂}(candidate, F^I(Σ̂)) through k_discrepancy. Throws CutLocusError.
double discrepancy_statistic(const Flag& candidate, const Matrix& sigma_hat, const FlagType& type, long n);

/// Whether `candidate` lies in the asymptotic (1 − α) confidence region.
/// A candidate in the cut locus of F^I(Σ̂) is outside; `diagnostic`, when
/// given, receives the reason.
bool confidence_region_contains(const Flag& candidate, const Matrix& sigma_hat, const FlagType& type, long n,
                                double alpha, std::string* diagnostic = nullptr);

enum class Decision { Accept, Reject };

struct TestOutcome {
  Decision decision = Decision::Accept;
  PivotalReport report;
  double alpha = 0.05;
  double critical_value = 0.0;
};

/// Test of H0: π^I(Q0) = F^I(Σ) at asymptotic level α.
TestOutcome flag_hypothesis_test(const Matrix& q0, const Matrix& data, const FlagType& type, double alpha,
                                 Denominator denominator = Denominator::N);

struct DofComparison {
  int per_subspace = 0;  // Σ q_i (d − q_i)
  int flag = 0;          // D^I
};

DofComparison tyler_dof_comparison(const FlagType& type);

/// {statistic, dof, p_value, truncated, alpha, decision}.
nlohmann::json report_to_json(const PivotalReport& report, double alpha, Decision decision);
const char* to_string(Decision decision);

}  // namespace flagstat
