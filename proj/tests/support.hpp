#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "flagstat/montecarlo.hpp"

namespace flagstat::testing {

inline Projector random_projector(int d, int q, Rng& rng) {
  return projector_from_frame(haar_orthogonal(d, rng).leftCols(q));
}

/// Block-diagonal orthogonal matrix with a Haar block per β_i.
inline Matrix random_block_orthogonal(const FlagType& type, Rng& rng) {
  Matrix o = Matrix::Zero(type.dim(), type.dim());
  for (int i = 0; i < type.blocks(); ++i) {
    const int q = type.multiplicity(i);
    o.block(type.offset(i), type.offset(i), q, q) = haar_orthogonal(q, rng);
  }
  return o;
}

/// Random composition of a random d in [2, max_d].
inline FlagType random_type(int max_d, Rng& rng) {
  const int d = std::uniform_int_distribution<int>(2, max_d)(rng);
  std::vector<int> q;
  int left = d;
  while (left > 0) {
    const int take = std::uniform_int_distribution<int>(1, left)(rng);
    q.push_back(take);
    left -= take;
  }
  return FlagType(q);
}

inline BlockScaling random_scaling(const FlagType& type, Rng& rng) {
  std::uniform_real_distribution<double> u(0.2, 3.0);
  Matrix s = Matrix::Ones(type.blocks(), type.blocks());
  for (int i = 0; i < type.blocks(); ++i) {
    for (int j = 0; j < type.blocks(); ++j) {
      if (i != j) s(i, j) = u(rng);
    }
  }
  return BlockScaling(type, s);
}

// Oracles independent of the library code paths.
namespace oracle {

/// Scaling and squaring around a 40-term Taylor series.
inline Matrix expm_taylor(const Matrix& a) {
  const double norm = a.lpNorm<Eigen::Infinity>();
  int squarings = 0;
  while (norm / std::ldexp(1.0, squarings) > 0.5) ++squarings;
  const Matrix b = a / std::ldexp(1.0, squarings);
  Matrix term = Matrix::Identity(a.rows(), a.cols());
  Matrix sum = term;
  for (int k = 1; k <= 40; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

/// χ² CDF by composite Simpson quadrature of the density, with std::tgamma.
inline double chi2_cdf_quadrature(int dof, double x) {
  const double k = 0.5 * dof;
  const double norm = 1.0 / (std::pow(2.0, k) * std::tgamma(k));
  // Substitute t = s² to remove the t^{k-1} singularity for dof = 1.
  auto f = [&](double s) { return 2.0 * norm * std::pow(s, dof - 1) * std::exp(-0.5 * s * s); };
  const int m = 20000;
  const double hi = std::sqrt(x);
  const double h = hi / m;
  double sum = f(0.0) + f(hi);
  for (int i = 1; i < m; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return sum * h / 3.0;
}

/// Eigen's own self-adjoint solver, eigenvalues descending.
inline Vector eigenvalues_desc(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  return es.eigenvalues().reverse();
}

}  // namespace oracle

}  // namespace flagstat::testing
