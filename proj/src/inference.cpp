#include "flagstat/inference.hpp"

#include <cmath>
#include <string>

namespace flagstat {

CovModel::CovModel(Matrix gamma_in, std::vector<double> lambdas_in, FlagType type_in)
    : gamma(std::move(gamma_in)), lambdas(std::move(lambdas_in)), type(std::move(type_in)) {
  if (gamma.rows() != type.dim() || !is_orthogonal(gamma)) {
    throw DomainError("covariance model: gamma must be a d x d orthogonal matrix");
  }
  if (static_cast<int>(lambdas.size()) != type.blocks()) {
    throw DomainError("covariance model: one eigenvalue per block is required");
  }
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || !std::isfinite(lambdas[i])) {
      throw DomainError("covariance model: eigenvalues must be positive");
    }
    if (i > 0 && !(lambdas[i] < lambdas[i - 1])) {
      throw DomainError("covariance model: eigenvalues must be strictly decreasing");
    }
  }
}

Matrix CovModel::delta() const {
  Vector diag(type.dim());
  for (int i = 0; i < type.blocks(); ++i) {
    diag.segment(type.offset(i), type.multiplicity(i)).setConstant(lambdas[static_cast<std::size_t>(i)]);
  }
  return diag.asDiagonal();
}

Matrix CovModel::sigma() const { return symmetrize(gamma * delta() * gamma.transpose()); }

Matrix sample_covariance(const Matrix& data, Denominator denominator) {
  const Eigen::Index n = data.rows();
  if (n < 2) throw DomainError("sample_covariance: at least two samples are required");
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Matrix centred = data.rowwise() - mean;
  const double denom = denominator == Denominator::N ? static_cast<double>(n) : static_cast<double>(n - 1);
  return symmetrize(centred.transpose() * centred / denom);
}

SampleSpectrum SampleSpectrum::from(const Matrix& sigma_hat, long n, const FlagType& type) {
  if (sigma_hat.rows() != type.dim()) throw DomainError("sample spectrum: dimension does not match the type");
  SampleSpectrum out;
  out.sigma_hat = sigma_hat;
  out.n = n;
  out.eigvals = sym_eig_desc(sigma_hat).values;
  for (int i = 0; i < type.blocks(); ++i) {
    out.block_means.push_back(out.eigvals.segment(type.offset(i), type.multiplicity(i)).mean());
  }
  return out;
}

AndersonStats anderson_statistics(const Matrix& gamma, const Matrix& delta, const Matrix& sigma_hat, long n,
                                  const FlagType& type) {
  if (gamma.rows() != type.dim() || delta.rows() != type.dim() || sigma_hat.rows() != type.dim()) {
    throw DomainError("anderson_statistics: dimension does not match the type");
  }
  const double root_n = std::sqrt(static_cast<double>(n));
  AndersonStats out;
  out.t = symmetrize(gamma.transpose() * sigma_hat * gamma);
  out.u = root_n * (out.t - delta);
  out.e = eigvec_map_psi(out.t);
  out.f = root_n * out.e;
  for (int i = 0; i < type.blocks(); ++i) out.diagonal_blocks.push_back(block(out.e, type, i, i));
  return out;
}

bool block_truncated(const Matrix& e, const FlagType& type, int i) {
  Eigen::JacobiSVD<Matrix> svd(block(e, type, i, i));
  return svd.singularValues().minCoeff() < kTruncationTol;
}

TangentStatistic g_statistic_from_e(const Matrix& e, const FlagType& type, long n, int i) {
  const int d = type.dim();
  if (block_truncated(e, type, i)) return TangentStatistic{Matrix::Zero(d, d), true};
  const Matrix ei = column_block(e, type, i);
  const Matrix log = detail::grass_log_unchecked(standard_projector(type, i), symmetrize(ei * ei.transpose()));
  return TangentStatistic{std::sqrt(static_cast<double>(n)) * log, false};
}

TangentStatistic g_statistic(const Matrix& gamma, const Matrix& sigma_hat, const FlagType& type, long n, int i) {
  if (gamma.rows() != type.dim() || sigma_hat.rows() != type.dim()) {
    throw DomainError("g_statistic: dimension does not match the type");
  }
  return g_statistic_from_e(eigvec_map_psi(symmetrize(gamma.transpose() * sigma_hat * gamma)), type, n, i);
}

HolonomyStatistic h_statistic_from_e(const Matrix& e, const FlagType& type, int i) {
  const int q = type.multiplicity(i);
  if (block_truncated(e, type, i)) return HolonomyStatistic{Matrix::Identity(q, q), true};
  const Matrix ei = column_block(e, type, i);
  const Matrix log = detail::grass_log_unchecked(symmetrize(ei * ei.transpose()), standard_projector(type, i));
  const Matrix moved = detail::holonomy_from_log(log, ei);
  return HolonomyStatistic{moved.middleRows(type.offset(i), q), false};
}

HolonomyStatistic h_statistic(const Matrix& gamma, const Matrix& sigma_hat, const FlagType& type, long /*n*/,
                              int i) {
  if (gamma.rows() != type.dim() || sigma_hat.rows() != type.dim()) {
    throw DomainError("h_statistic: dimension does not match the type");
  }
  return h_statistic_from_e(eigvec_map_psi(symmetrize(gamma.transpose() * sigma_hat * gamma)), type, i);
}

int dof(const FlagType& type) {
  const int d = type.dim();
  int sum_sq = 0;
  for (int q : type.multiplicities()) sum_sq += q * q;
  return (d * d - sum_sq) / 2;
}

BlockScaling khat_scaling(const SampleSpectrum& spectrum, const FlagType& type) {
  const int r = type.blocks();
  const auto& lam = spectrum.block_means;
  if (static_cast<int>(lam.size()) != r) throw DomainError("khat_scaling: spectrum does not match the type");
  for (int i = 0; i + 1 < r; ++i) {
    if (!(lam[i] > lam[i + 1])) throw DegenerateScalingError("khat_scaling: block means are not distinct");
  }
  if (r > 0 && !(lam[static_cast<std::size_t>(r - 1)] > 0.0)) {
    throw DegenerateScalingError("khat_scaling: block means must be positive");
  }
  Matrix scalars = Matrix::Ones(r, r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      if (i == j) continue;
      const double li = lam[static_cast<std::size_t>(i)];
      const double lj = lam[static_cast<std::size_t>(j)];
      const double sigma = std::sqrt(li * lj) / std::abs(li - lj);
      scalars(i, j) = 1.0 / sigma;
    }
  }
  return BlockScaling(type, std::move(scalars));
}

namespace {

double p_value_for(int dof_value, double statistic) {
  return dof_value == 0 ? 1.0 : chi2_sf(dof_value, statistic);
}

}  // namespace

PivotalReport pivotal_statistic(const Matrix& gamma, const Matrix& sigma_hat, const FlagType& type, long n) {
  if (n < 2) throw DomainError("pivotal_statistic: n must be at least 2");
  if (gamma.rows() != type.dim() || sigma_hat.rows() != type.dim()) {
    throw DomainError("pivotal_statistic: dimension does not match the type");
  }
  if (!is_orthogonal(gamma)) throw DomainError("pivotal_statistic: reference matrix is not orthogonal");

  const BlockScaling k = khat_scaling(SampleSpectrum::from(sigma_hat, n, type), type);
  const Matrix e = eigvec_map_psi(symmetrize(gamma.transpose() * sigma_hat * gamma));

  PivotalReport report;
  report.dof = dof(type);
  double sum = 0.0;
  for (int i = 0; i < type.blocks(); ++i) {
    const bool truncated = block_truncated(e, type, i);
    report.truncated.push_back(truncated);
    if (truncated) {
      report.truncation_applied = true;
      continue;
    }
    const Matrix ei = column_block(e, type, i);
    const Matrix log = detail::grass_log_unchecked(standard_projector(type, i), symmetrize(ei * ei.transpose()));
    const Vector ki = k.diagonal(i);
    sum += (ki.asDiagonal() * log * ki.asDiagonal()).squaredNorm();
  }
  report.statistic = 0.25 * static_cast<double>(n) * sum;
  report.p_value = p_value_for(report.dof, report.statistic);
  return report;
}

PivotalReport pivotal_statistic(const Flag& reference, const Matrix& sigma_hat, const FlagType& type, long n) {
  if (!(reference.type() == type)) throw DomainError("pivotal_statistic: reference flag has a different type");
  return pivotal_statistic(flag_representative(reference), sigma_hat, type, n);
}

double discrepancy_statistic(const Flag& candidate, const Matrix& sigma_hat, const FlagType& type, long n) {
  if (!(candidate.type() == type)) throw DomainError("discrepancy_statistic: candidate has a different type");
  const BlockScaling k = khat_scaling(SampleSpectrum::from(sigma_hat, n, type), type);
  const Flag centre = flag_of_eigenspaces(sigma_hat, type);
  const double disc = k_discrepancy(k, candidate, centre);
  return 0.25 * static_cast<double>(n) * disc * disc;
}

namespace {

void require_level(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

}  // namespace

bool confidence_region_contains(const Flag& candidate, const Matrix& sigma_hat, const FlagType& type, long n,
                                double alpha, std::string* diagnostic) {
  require_level(alpha);
  const int dof_value = dof(type);
  double statistic = 0.0;
  try {
    statistic = discrepancy_statistic(candidate, sigma_hat, type, n);
  } catch (const CutLocusError& e) {
    if (diagnostic) *diagnostic = e.what();
    return false;
  }
  if (dof_value == 0) return true;
  const double critical = chi2_quantile(dof_value, 1.0 - alpha);
  if (diagnostic) {
    *diagnostic = "statistic " + std::to_string(statistic) + " vs critical value " + std::to_string(critical);
  }
  return statistic <= critical;
}

TestOutcome flag_hypothesis_test(const Matrix& q0, const Matrix& data, const FlagType& type, double alpha,
                                 Denominator denominator) {
  require_level(alpha);
  if (data.cols() != type.dim()) throw DomainError("flag_hypothesis_test: data dimension does not match the type");
  const long n = static_cast<long>(data.rows());
  const Matrix sigma_hat = sample_covariance(data, denominator);

  TestOutcome out;
  out.alpha = alpha;
  out.report = pivotal_statistic(q0, sigma_hat, type, n);
  out.critical_value = out.report.dof == 0 ? 0.0 : chi2_quantile(out.report.dof, 1.0 - alpha);
  const bool inside = confidence_region_contains(flag_from_orthogonal(q0, type), sigma_hat, type, n, alpha);
  out.decision = inside ? Decision::Accept : Decision::Reject;
  return out;
}

DofComparison tyler_dof_comparison(const FlagType& type) {
  DofComparison out;
  for (int q : type.multiplicities()) out.per_subspace += q * (type.dim() - q);
  out.flag = dof(type);
  return out;
}

const char* to_string(Decision decision) { return decision == Decision::Accept ? "accept" : "reject"; }

nlohmann::json report_to_json(const PivotalReport& report, double alpha, Decision decision) {
  nlohmann::json doc;
  doc["statistic"] = report.statistic;
  doc["dof"] = report.dof;
  doc["p_value"] = report.p_value;
  doc["truncated"] = report.truncated;
  doc["alpha"] = alpha;
  doc["decision"] = to_string(decision);
  return doc;
}

}  // namespace flagstat
