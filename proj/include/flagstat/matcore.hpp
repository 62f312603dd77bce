#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "flagstat/errors.hpp"

namespace flagstat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Random stream used everywhere a sampler needs randomness. Streams are
/// passed explicitly and never shared between concurrent callers.
using Rng = std::mt19937_64;

/// Deterministic stream for replicate `index` of a run seeded with `seed`.
/// Depends only on the pair, so replicates can be evaluated in any order.
Rng replicate_stream(std::uint64_t seed, std::uint64_t index);

// Tolerances shared by the validators.
inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kOrthogonalityTol = 1e-10;
inline constexpr double kPsiGapTol = 1e-10;

/// Relative Frobenius asymmetry ‖S − S'‖ / max(‖S‖, 1).
double asymmetry(const Matrix& s);
bool is_symmetric(const Matrix& s, double tol = kSymmetryTol);

/// ‖Q'Q − I‖_F.
double orthogonality_error(const Matrix& q);
bool is_orthogonal(const Matrix& q, double tol = kOrthogonalityTol);

/// Symmetric part (S + S') / 2.
Matrix symmetrize(const Matrix& s);
/// Skew part (A − A') / 2.
Matrix skew_part(const Matrix& a);

struct SymEig {
  Vector values;   // non-increasing
  Matrix vectors;  // orthogonal; column k pairs with values[k]
};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations,
/// eigenvalues sorted non-increasing. Ties keep their original column order,
/// so a fully degenerate input returns the identity as its eigenvector matrix.
/// Throws DomainError for non-square or non-symmetric input and NumericError
/// if the sweep budget is exhausted.
SymEig sym_eig_desc(const Matrix& s);

/// The eigenvector map: column k is the unit eigenvector of the k-th largest
/// eigenvalue with a non-negative k-th entry (ties at zero are broken by the
/// largest-magnitude entry). A diagonal input with non-increasing entries maps
/// to the identity. Throws DomainError on repeated eigenvalues otherwise.
Matrix eigvec_map_psi(const Matrix& s);

/// Matrix exponential.
Matrix expm(const Matrix& a);

/// Principal logarithm of a rotation, via the real Schur form. The result is
/// exactly skew-symmetric. Throws CutLocusError when an eigenvalue sits at −1
/// (rotation angle π) and DomainError when `q` is not special orthogonal.
Matrix logm_rotation(const Matrix& q);

/// Orthogonal polar factor U V' of A = U S V'.
Matrix nearest_orthogonal(const Matrix& a);

/// d×k matrix of iid N(0,1) entries, filled column by column.
Matrix standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Haar-distributed draw from O(q): Householder QR of a Gaussian matrix with
/// the signs of R's diagonal folded into Q.
Matrix haar_orthogonal(int q, Rng& rng);

/// Draw from the conditional Haar law on O(q): Haar restricted to matrices
/// with positive diagonal. Obtained by flipping the columns of a Haar draw
/// whose diagonal entry is negative, which is measure preserving.
Matrix conditional_haar_orthogonal(int q, Rng& rng);

// ---- chi-square -----------------------------------------------------------

/// log Γ(x) for x > 0 (Lanczos, g = 7).
double log_gamma(double x);
/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
double gamma_q(double a, double x);

double chi2_pdf(int dof, double x);
double chi2_cdf(int dof, double x);
/// Survival function P(χ²_dof > x). dof = 0 is the point mass at zero.
double chi2_sf(int dof, double x);
/// Quantile of order p ∈ (0, 1). Throws DomainError outside that interval.
double chi2_quantile(int dof, double p);

}  // namespace flagstat
