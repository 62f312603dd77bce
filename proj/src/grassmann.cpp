#include "flagstat/grassmann.hpp"

#include <cmath>
#include <string>

namespace flagstat {

Projector Projector::from_matrix(const Matrix& p) {
  if (p.rows() != p.cols() || p.rows() == 0) throw DomainError("projector: expected a square matrix");
  if ((p - p.transpose()).norm() > kProjectorTol) throw DomainError("projector: matrix is not symmetric");
  Matrix sym = symmetrize(p);
  if ((sym * sym - sym).norm() > kProjectorTol) throw DomainError("projector: matrix is not idempotent");
  const double trace = sym.trace();
  const double rounded = std::round(trace);
  if (std::abs(trace - rounded) > kTraceTol || rounded < 1.0) {
    throw DomainError("projector: trace is not a positive integer rank");
  }
  return Projector(std::move(sym), static_cast<int>(rounded));
}

double tangent_residual(const Matrix& delta, const Matrix& p) {
  return (delta * p + p * delta - delta).norm();
}

Projector projector_from_frame(const Matrix& u) {
  if (u.cols() == 0 || u.cols() > u.rows()) throw DomainError("projector_from_frame: bad frame shape");
  if (orthogonality_error(u) > kOrthogonalityTol) {
    throw DomainError("projector_from_frame: columns are not orthonormal");
  }
  return Projector::from_matrix(symmetrize(u * u.transpose()));
}

Matrix range_basis(const Projector& p) {
  SymEig eig = sym_eig_desc(p.matrix());
  return eig.vectors.leftCols(p.rank());
}

namespace {

void require_compatible(const Projector& p, const Projector& r, const char* who) {
  if (p.dim() != r.dim() || p.rank() != r.rank()) {
    throw DomainError(std::string(who) + ": projectors differ in dimension or rank");
  }
}

}  // namespace

double min_principal_cosine(const Projector& p, const Projector& r) {
  require_compatible(p, r, "min_principal_cosine");
  const Matrix cross = range_basis(p).transpose() * range_basis(r);
  Eigen::JacobiSVD<Matrix> svd(cross);
  return svd.singularValues().minCoeff();
}

bool in_cut_locus(const Projector& p, const Projector& r) {
  return min_principal_cosine(p, r) < kCutLocusTol;
}

namespace detail {

Matrix grass_log_unchecked(const Matrix& p, const Matrix& r) {
  const Eigen::Index d = p.rows();
  const Matrix id = Matrix::Identity(d, d);
  // (I − 2R)(I − 2P) is a rotation in exact arithmetic; project away round-off.
  const Matrix rot = nearest_orthogonal((id - 2.0 * r) * (id - 2.0 * p));
  const Matrix omega = 0.5 * logm_rotation(rot);
  return symmetrize(omega * p - p * omega);
}

}  // namespace detail

GrassTangent grass_log(const Projector& p, const Projector& r) {
  require_compatible(p, r, "grass_log");
  if (in_cut_locus(p, r)) throw CutLocusError("grass_log: target lies in the cut locus of the base");
  return GrassTangent{detail::grass_log_unchecked(p.matrix(), r.matrix()), p};
}

Projector grass_exp(const Projector& p, const GrassTangent& delta) {
  if (delta.base.dim() != p.dim() || delta.base.rank() != p.rank() ||
      (delta.base.matrix() - p.matrix()).norm() > kProjectorTol) {
    throw DomainError("grass_exp: tangent vector is not based at this projector");
  }
  if (delta.delta.rows() != p.dim() || delta.delta.cols() != p.dim()) {
    throw DomainError("grass_exp: tangent vector has the wrong shape");
  }
  const double scale = std::max(delta.delta.norm(), 1.0);
  if (asymmetry(delta.delta) > kTangentTol || tangent_residual(delta.delta, p.matrix()) > 1e-8 * scale) {
    throw DomainError("grass_exp: matrix is not a tangent vector at the base");
  }
  const Matrix gen = delta.delta * p.matrix() - p.matrix() * delta.delta;
  const Matrix rot = expm(gen);
  return Projector::from_matrix(symmetrize(rot * p.matrix() * rot.transpose()));
}

double grass_dist(const Projector& p, const Projector& r) { return grass_log(p, r).delta.norm(); }

Projector conjugate(const Matrix& q, const Projector& p) {
  if (q.rows() != p.dim() || !is_orthogonal(q)) throw DomainError("conjugate: expected an orthogonal matrix");
  return Projector::from_matrix(symmetrize(q * p.matrix() * q.transpose()));
}

}  // namespace flagstat
