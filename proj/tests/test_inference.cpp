#include "doctest.h"
#include "support.hpp"

using namespace flagstat;
using namespace flagstat::testing;

namespace {

Matrix rotation2(double t) {
  Matrix r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

Matrix diag(std::vector<double> v) { return Vector::Map(v.data(), static_cast<Eigen::Index>(v.size())).asDiagonal(); }

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("covariance model validation") {
  const FlagType type({1, 2});
  CHECK_NOTHROW(CovModel(Matrix::Identity(3, 3), {2.0, 1.0}, type));
  CHECK_THROWS_AS(CovModel(Matrix::Identity(3, 3), {1.0, 2.0}, type), DomainError);
  CHECK_THROWS_AS(CovModel(Matrix::Identity(3, 3), {2.0, 0.0}, type), DomainError);
  CHECK_THROWS_AS(CovModel(Matrix::Identity(3, 3), {2.0}, type), DomainError);
  CHECK_THROWS_AS(CovModel(2.0 * Matrix::Identity(3, 3), {2.0, 1.0}, type), DomainError);
  const CovModel m(Matrix::Identity(3, 3), {2.0, 1.0}, type);
  CHECK(m.delta() == diag({2, 1, 1}));
  CHECK(m.sigma() == diag({2, 1, 1}));
}

TEST_CASE("sample covariance centres and scales") {
  Matrix x(4, 2);
  x << 1, 2, 3, 4, 5, 0, 7, 2;
  // Column means 4 and 2; deviations (-3,0), (-1,2), (1,-2), (3,0).
  const Matrix expected = Matrix{{20.0, -4.0}, {-4.0, 8.0}};
  CHECK((sample_covariance(x, Denominator::N) - expected / 4.0).norm() < 1e-15);
  CHECK((sample_covariance(x, Denominator::NMinusOne) - expected / 3.0).norm() < 1e-15);
  CHECK_THROWS_AS(sample_covariance(Matrix::Ones(1, 2)), DomainError);
  const Matrix two = Matrix{{0.0, 0.0}, {2.0, 0.0}};
  CHECK(sample_covariance(two, Denominator::N) == Matrix{{1.0, 0.0}, {0.0, 0.0}});
  CHECK(sample_covariance(two, Denominator::NMinusOne)(0, 0) == 2.0);
}

TEST_CASE("degrees of freedom") {
  CHECK(dof(FlagType({1, 1, 1, 1})) == 6);
  CHECK(dof(FlagType({2, 2})) == 4);
  CHECK(dof(FlagType({1, 2})) == 2);
  CHECK(dof(FlagType({4})) == 0);
  const DofComparison c = tyler_dof_comparison(FlagType({1, 2, 3}));
  CHECK(c.per_subspace == 5 + 8 + 9);
  CHECK(c.per_subspace == 2 * c.flag);
}

TEST_CASE("sample spectrum and scaling") {
  const FlagType type({1, 2});
  const SampleSpectrum s = SampleSpectrum::from(diag({6, 3, 1}), 100, type);
  CHECK(s.block_means == std::vector<double>{6.0, 2.0});
  const BlockScaling k = khat_scaling(s, type);
  CHECK(k.scalars()(0, 1) == doctest::Approx(4.0 / std::sqrt(12.0)).epsilon(1e-15));
  CHECK(k.scalars()(1, 0) == k.scalars()(0, 1));
  CHECK_THROWS_AS(khat_scaling(SampleSpectrum::from(diag({2, 2, 2}), 100, type), type), DegenerateScalingError);
}

TEST_CASE("Anderson statistics at the truth") {
  const FlagType type({1, 1, 1});
  const Matrix delta = diag({3, 2, 1});
  const AndersonStats st = anderson_statistics(Matrix::Identity(3, 3), delta, delta, 400, type);
  CHECK(st.u.isZero(0.0));
  CHECK(st.e.isIdentity(0.0));
  CHECK((st.f - 20.0 * Matrix::Identity(3, 3)).norm() == 0.0);
  CHECK(st.diagonal_blocks.size() == 3);
}

TEST_CASE("pivotal statistic in closed form for d = 2") {
  // Σ̂ = R(θ) diag(a, b) R(θ)' against Γ = I gives T̂ = n θ² (a − b)² / (ab).
  const FlagType type({1, 1});
  const double a = 3.0, b = 1.0;
  const long n = 1000;
  for (double theta : {0.01, 0.05, -0.2}) {
    const Matrix sigma_hat = rotation2(theta) * diag({a, b}) * rotation2(theta).transpose();
    const PivotalReport r = pivotal_statistic(Matrix::Identity(2, 2), sigma_hat, type, n);
    const double expected = n * theta * theta * (a - b) * (a - b) / (a * b);
    CHECK(r.statistic == doctest::Approx(expected).epsilon(1e-10));
    CHECK(r.dof == 1);
    CHECK(r.p_value == doctest::Approx(chi2_sf(1, expected)).epsilon(1e-12));
    CHECK(discrepancy_statistic(standard_flag(type), sigma_hat, type, n) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("pivotal statistic depends on Γ only through its flag") {
  Rng rng = replicate_stream(50, 0);
  const FlagType type({2, 1, 2});
  const CovModel model = seeded_model({5, 3, 1}, type, 9);
  const Matrix sigma_hat = sample_covariance(sample_gaussian(model, 300, rng));
  const double base = pivotal_statistic(model.gamma, sigma_hat, type, 300).statistic;
  const Matrix moved = model.gamma * random_block_orthogonal(type, rng);
  CHECK(pivotal_statistic(moved, sigma_hat, type, 300).statistic == doctest::Approx(base).epsilon(1e-10));
  CHECK(pivotal_statistic(flag_from_orthogonal(model.gamma, type), sigma_hat, type, 300).statistic ==
        doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("pivotal statistic is O(d)-invariant") {
  Rng rng = replicate_stream(51, 0);
  const FlagType type({1, 1, 2});
  const CovModel model = seeded_model({4, 2, 1}, type, 10);
  const Matrix sigma_hat = sample_covariance(sample_gaussian(model, 200, rng));
  const Matrix o = haar_orthogonal(4, rng);
  const double base = pivotal_statistic(model.gamma, sigma_hat, type, 200).statistic;
  const double moved =
      pivotal_statistic(o * model.gamma, symmetrize(o * sigma_hat * o.transpose()), type, 200).statistic;
  CHECK(moved == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("a single block has no degrees of freedom") {
  const FlagType type({3});
  const PivotalReport r = pivotal_statistic(Matrix::Identity(3, 3), diag({3, 2, 1}), type, 50);
  CHECK(r.dof == 0);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
  CHECK(confidence_region_contains(standard_flag(type), diag({3, 2, 1}), type, 50, 0.05));
}

TEST_CASE("G and H statistics") {
  Rng rng = replicate_stream(52, 0);
  const FlagType type({2, 2});
  const CovModel model = seeded_model({4, 1}, type, 11);
  const Matrix sigma_hat = sample_covariance(sample_gaussian(model, 500, rng));
  for (int i = 0; i < 2; ++i) {
    const TangentStatistic g = g_statistic(model.gamma, sigma_hat, type, 500, i);
    CHECK_FALSE(g.truncated);
    CHECK(tangent_residual(g.value, standard_projector(type, i)) < 1e-10 * std::max(1.0, g.value.norm()));
    const HolonomyStatistic h = h_statistic(model.gamma, sigma_hat, type, 500, i);
    CHECK(orthogonality_error(h.value) < 1e-12);
    CHECK(h.value.rows() == 2);
  }
}

TEST_CASE("swapped eigenspaces are truncated") {
  const FlagType type({2, 2});
  const Matrix sigma_hat = diag({1.0, 1.1, 4.0, 4.1});
  const PivotalReport r = pivotal_statistic(Matrix::Identity(4, 4), sigma_hat, type, 1000);
  CHECK(r.truncated == std::vector<bool>{true, true});
  CHECK(r.truncation_applied);
  CHECK(r.statistic == 0.0);
  std::string why;
  CHECK_FALSE(confidence_region_contains(standard_flag(type), sigma_hat, type, 1000, 0.05, &why));
  CHECK(why.find("cut locus") != std::string::npos);
  CHECK(h_statistic(Matrix::Identity(4, 4), sigma_hat, type, 1000, 1).value.isIdentity(0.0));
  CHECK(g_statistic(Matrix::Identity(4, 4), sigma_hat, type, 1000, 1).value.isZero(0.0));
}

TEST_CASE("hypothesis test decision and power against swapped blocks") {
  const FlagType type({1, 1, 1, 1});
  const CovModel model = seeded_model({8, 4, 2, 1}, type, 12);
  Rng rng = replicate_stream(53, 0);
  const Matrix data = sample_gaussian(model, 10000, rng);
  const TestOutcome ok = flag_hypothesis_test(model.gamma, data, type, 0.05);
  CHECK((ok.decision == Decision::Accept) == (ok.report.statistic <= ok.critical_value));
  CHECK(ok.critical_value == doctest::Approx(12.591587243743977).epsilon(1e-12));
  Matrix swapped = model.gamma;
  swapped.col(0).swap(swapped.col(1));
  const TestOutcome bad = flag_hypothesis_test(swapped, data, type, 0.05);
  CHECK(bad.decision == Decision::Reject);
  CHECK_THROWS_AS(flag_hypothesis_test(model.gamma, data.leftCols(3), type, 0.05), DomainError);
  CHECK_THROWS_AS(flag_hypothesis_test(model.gamma, data, type, 1.5), DomainError);
}

TEST_CASE("hypothesis test level over seeded data sets") {
  const FlagType type({1, 2, 1});
  const CovModel model = seeded_model({6, 3, 1}, type, 13);
  int accepted = 0;
  const int runs = 300;
  for (int k = 0; k < runs; ++k) {
    Rng rng = replicate_stream(54, static_cast<std::uint64_t>(k));
    accepted += flag_hypothesis_test(model.gamma, sample_gaussian(model, 2000, rng), type, 0.05).decision ==
                Decision::Accept;
  }
  const double rate = static_cast<double>(accepted) / runs;
  CHECK(rate > 0.91);
  CHECK(rate < 0.99);
}

TEST_CASE("report JSON") {
  PivotalReport r;
  r.statistic = 1.5;
  r.dof = 2;
  r.p_value = 0.25;
  r.truncated = {false, true};
  const nlohmann::json doc = report_to_json(r, 0.05, Decision::Reject);
  CHECK(doc.at("statistic") == 1.5);
  CHECK(doc.at("dof") == 2);
  CHECK(doc.at("p_value") == 0.25);
  CHECK(doc.at("truncated") == nlohmann::json({false, true}));
  CHECK(doc.at("alpha") == 0.05);
  CHECK(doc.at("decision") == "reject");
}

}
