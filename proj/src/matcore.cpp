#include "flagstat/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

namespace flagstat {

namespace {

constexpr int kJacobiMaxSweeps = 100;
constexpr double kPsiZeroEntry = 1e-12;
// Rotation angle this close to π is treated as an eigenvalue at −1.
constexpr double kRotationCutAngle = 1e-10;

void require_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DomainError(std::string(who) + ": expected a non-empty square matrix");
  }
}

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

bool is_ordered_diagonal(const Matrix& s) {
  const double scale = std::max(s.norm(), 1.0);
  if (off_diagonal_norm(s) > kSymmetryTol * scale) return false;
  for (Eigen::Index k = 0; k + 1 < s.rows(); ++k) {
    if (s(k, k) < s(k + 1, k + 1)) return false;
  }
  return true;
}

}  // namespace

Rng replicate_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

double asymmetry(const Matrix& s) {
  if (s.rows() != s.cols()) return std::numeric_limits<double>::infinity();
  return (s - s.transpose()).norm() / std::max(s.norm(), 1.0);
}

bool is_symmetric(const Matrix& s, double tol) { return asymmetry(s) <= tol; }

double orthogonality_error(const Matrix& q) {
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

bool is_orthogonal(const Matrix& q, double tol) {
  return q.rows() == q.cols() && orthogonality_error(q) <= tol;
}

Matrix symmetrize(const Matrix& s) { return 0.5 * (s + s.transpose()); }

Matrix skew_part(const Matrix& a) { return 0.5 * (a - a.transpose()); }

SymEig sym_eig_desc(const Matrix& s) {
  require_square(s, "sym_eig_desc");
  if (!is_symmetric(s, 1e-10)) throw DomainError("sym_eig_desc: input is not symmetric");

  const Eigen::Index n = s.rows();
  Matrix a = symmetrize(s);
  Matrix v = Matrix::Identity(n, n);
  const double scale = a.norm();

  bool converged = scale == 0.0;
  for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
    if (off_diagonal_norm(a) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && off_diagonal_norm(a) > 1e-15 * scale) {
    throw NumericError("sym_eig_desc: Jacobi iteration did not converge");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&a](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  SymEig out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

Matrix eigvec_map_psi(const Matrix& s) {
  require_square(s, "eigvec_map_psi");
  const Eigen::Index d = s.rows();
  if (is_ordered_diagonal(s)) return Matrix::Identity(d, d);

  SymEig eig = sym_eig_desc(s);
  const double scale = std::max(eig.values.cwiseAbs().maxCoeff(), 1.0);
  for (Eigen::Index k = 0; k + 1 < d; ++k) {
    if ((eig.values[k] - eig.values[k + 1]) / scale < kPsiGapTol) {
      throw DomainError("eigvec_map_psi: repeated eigenvalues");
    }
  }
  for (Eigen::Index k = 0; k < d; ++k) {
    auto col = eig.vectors.col(k);
    double pivot = col[k];
    if (std::abs(pivot) < kPsiZeroEntry) {
      Eigen::Index arg = 0;
      col.cwiseAbs().maxCoeff(&arg);
      pivot = col[arg];
    }
    if (pivot < 0.0) col = -col;
  }
  return eig.vectors;
}

Matrix expm(const Matrix& a) {
  require_square(a, "expm");
  return a.exp();
}

Matrix logm_rotation(const Matrix& q) {
  require_square(q, "logm_rotation");
  if (!is_orthogonal(q, 1e-8)) throw DomainError("logm_rotation: input is not orthogonal");
  if (q.determinant() <= 0.0) throw DomainError("logm_rotation: determinant is not +1");

  const Eigen::Index n = q.rows();
  Eigen::RealSchur<Matrix> schur(q);
  const Matrix& t = schur.matrixT();
  const Matrix& z = schur.matrixU();

  Matrix log_t = Matrix::Zero(n, n);
  Eigen::Index k = 0;
  while (k < n) {
    if (k + 1 < n && t(k + 1, k) != 0.0) {
      const Eigen::Matrix2d b = t.block<2, 2>(k, k);
      const double re = 0.5 * (b(0, 0) + b(1, 1));
      const double half_diff = 0.5 * (b(0, 0) - b(1, 1));
      const double disc = half_diff * half_diff + b(0, 1) * b(1, 0);
      if (disc >= 0.0) {
        // Unsplit block with a near-double eigenvalue: small-angle limit phi/im -> 1/re.
        if (re <= 0.0) throw CutLocusError("logm_rotation: eigenvalue at -1");
        if (disc > 1e-12 * re * re) throw NumericError("logm_rotation: unexpected real 2x2 Schur block");
        log_t.block<2, 2>(k, k) =
            std::log(re) * Eigen::Matrix2d::Identity() + (b - re * Eigen::Matrix2d::Identity()) / re;
        k += 2;
        continue;
      }
      const double im = std::sqrt(-disc);
      const double phi = std::atan2(im, re);
      if (M_PI - phi < kRotationCutAngle) {
        throw CutLocusError("logm_rotation: rotation angle at pi");
      }
      const double r = std::hypot(re, im);
      const Eigen::Matrix2d blog =
          std::log(r) * Eigen::Matrix2d::Identity() + (phi / im) * (b - re * Eigen::Matrix2d::Identity());
      log_t.block<2, 2>(k, k) = blog;
      k += 2;
    } else {
      if (t(k, k) <= 0.0) throw CutLocusError("logm_rotation: eigenvalue at -1");
      log_t(k, k) = std::log(t(k, k));
      k += 1;
    }
  }
  return skew_part(z * log_t * z.transpose());
}

Matrix nearest_orthogonal(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

Matrix standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  }
  return g;
}

Matrix haar_orthogonal(int q, Rng& rng) {
  if (q < 1) throw DomainError("haar_orthogonal: dimension must be positive");
  const Matrix g = standard_normal_matrix(q, q, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix out = qr.householderQ() * Matrix::Identity(q, q);
  const Matrix& r = qr.matrixQR();
  for (int k = 0; k < q; ++k) {
    if (r(k, k) < 0.0) out.col(k) = -out.col(k);
  }
  return out;
}

Matrix conditional_haar_orthogonal(int q, Rng& rng) {
  Matrix out = haar_orthogonal(q, rng);
  for (int k = 0; k < q; ++k) {
    if (out(k, k) < 0.0) out.col(k) = -out.col(k);
  }
  return out;
}

}  // namespace flagstat
