#pragma once

#include "flagstat/grassmann.hpp"

namespace flagstat {

/// d×q matrix with orthonormal columns, a point of St(q, d).
class Frame {
 public:
  /// Validates U'U = I_q within 1e-10.
  static Frame from_matrix(const Matrix& u);

  const Matrix& matrix() const noexcept { return u_; }
  int dim() const noexcept { return static_cast<int>(u_.rows()); }
  int rank() const noexcept { return static_cast<int>(u_.cols()); }

 private:
  explicit Frame(Matrix u) : u_(std::move(u)) {}
  Matrix u_;
};

/// Transport of a frame spanning rg(P) along the horizontal lift of the
/// minimizing geodesic from P to R. The result spans rg(R).
/// Throws DomainError when U is not in the fiber of P and CutLocusError when
/// R ∈ Cut(P).
Frame holonomy(const Projector& p, const Projector& r, const Frame& u);

struct GeodesicDecomposition {
  Projector base;     // UU'
  Frame transported;  // holonomy(UU', R, U)
};

/// Splits U into its projector and the frame of rg(R) it is transported to.
GeodesicDecomposition geodesic_decomposition(const Frame& u, const Projector& r);

namespace detail {
/// The closed-form transport with Δ = Log_P(R) already computed.
Matrix holonomy_from_log(const Matrix& log_pr, const Matrix& u);
}  // namespace detail

}  // namespace flagstat
