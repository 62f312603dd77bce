#pragma once

#include "flagstat/matcore.hpp"

namespace flagstat {

inline constexpr double kProjectorTol = 1e-10;
inline constexpr double kTraceTol = 1e-8;
inline constexpr double kTangentTol = 1e-10;
/// Smallest singular value of Y'Z below which a pair is in the cut locus.
inline constexpr double kCutLocusTol = 1e-8;

/// Rank-q orthogonal projector of R^d, i.e. a point of G(q, d).
class Projector {
 public:
  /// Validates P' = P, P² = P (1e-10) and integral trace (1e-8).
  /// The stored matrix is symmetrized.
  static Projector from_matrix(const Matrix& p);

  const Matrix& matrix() const noexcept { return p_; }
  int rank() const noexcept { return rank_; }
  int dim() const noexcept { return static_cast<int>(p_.rows()); }

 private:
  Projector(Matrix p, int rank) : p_(std::move(p)), rank_(rank) {}
  Matrix p_;
  int rank_;
};

/// A tangent vector Δ at `base`, satisfying ΔP + PΔ = Δ.
struct GrassTangent {
  Matrix delta;
  Projector base;
};

/// ‖ΔP + PΔ − Δ‖_F; zero for tangent vectors at P.
double tangent_residual(const Matrix& delta, const Matrix& p);

/// UU' for a frame U with U'U = I_q. Throws DomainError otherwise.
Projector projector_from_frame(const Matrix& u);

/// Orthonormal basis of rg(P): eigenvectors of P with eigenvalue above 1/2.
Matrix range_basis(const Projector& p);

/// Smallest singular value of Y'Z, Y and Z orthonormal bases of rg(P), rg(R).
double min_principal_cosine(const Projector& p, const Projector& r);

/// True when R ∈ Cut(P), equivalently P ∈ Cut(R). Throws DomainError on
/// mismatched rank or dimension.
bool in_cut_locus(const Projector& p, const Projector& r);

/// Riemannian logarithm Log_P(R) = [Ω, P] with Ω = ½ log((I − 2R)(I − 2P)).
/// Throws CutLocusError when R ∈ Cut(P).
GrassTangent grass_log(const Projector& p, const Projector& r);

/// Exp_P(Δ) = e^{[Δ,P]} P e^{−[Δ,P]}. Throws DomainError when Δ is not based at P.
Projector grass_exp(const Projector& p, const GrassTangent& delta);

/// ‖Log_P(R)‖_F.
double grass_dist(const Projector& p, const Projector& r);

/// QPQ'.
Projector conjugate(const Matrix& q, const Projector& p);

namespace detail {
/// The closed-form logarithm without the cut-locus test. Callers must have
/// established that R ∉ Cut(P) by other means.
Matrix grass_log_unchecked(const Matrix& p, const Matrix& r);
}  // namespace detail

}  // namespace flagstat
