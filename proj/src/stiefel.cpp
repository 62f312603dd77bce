#include "flagstat/stiefel.hpp"

namespace flagstat {

Frame Frame::from_matrix(const Matrix& u) {
  if (u.cols() == 0 || u.cols() > u.rows()) throw DomainError("frame: bad shape");
  if (orthogonality_error(u) > kOrthogonalityTol) throw DomainError("frame: columns are not orthonormal");
  return Frame(u);
}

namespace detail {

Matrix holonomy_from_log(const Matrix& log_pr, const Matrix& u) {
  const Eigen::Index q = u.cols();
  const Matrix delta_u = log_pr * u;
  const Matrix c = symmetrize(u.transpose() * symmetrize(log_pr * log_pr) * u);

  Matrix gen = Matrix::Zero(2 * q, 2 * q);
  gen.topRightCorner(q, q) = -c;
  gen.bottomLeftCorner(q, q) = Matrix::Identity(q, q);
  const Matrix e = expm(gen);

  Matrix v(u.rows(), 2 * q);
  v << u, delta_u;
  return v * e.leftCols(q);
}

}  // namespace detail

Frame holonomy(const Projector& p, const Projector& r, const Frame& u) {
  if (u.dim() != p.dim() || u.rank() != p.rank()) throw DomainError("holonomy: frame shape does not match P");
  if ((u.matrix() * u.matrix().transpose() - p.matrix()).norm() > 1e-8) {
    throw DomainError("holonomy: frame is not in the fiber of P");
  }
  const GrassTangent log_pr = grass_log(p, r);
  return Frame::from_matrix(detail::holonomy_from_log(log_pr.delta, u.matrix()));
}

GeodesicDecomposition geodesic_decomposition(const Frame& u, const Projector& r) {
  Projector base = projector_from_frame(u.matrix());
  if (in_cut_locus(base, r)) throw CutLocusError("geodesic_decomposition: span(U) lies in Cut(R)");
  Frame moved = holonomy(base, r, u);
  return GeodesicDecomposition{std::move(base), std::move(moved)};
}

}  // namespace flagstat
