#include "flagstat/flag.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace flagstat {

FlagType::FlagType(std::vector<int> multiplicities) : q_(std::move(multiplicities)) {
  if (q_.empty()) throw DomainError("flag type: at least one block is required");
  offset_.reserve(q_.size());
  for (int q : q_) {
    if (q < 1) throw DomainError("flag type: multiplicities must be positive");
    offset_.push_back(d_);
    d_ += q;
  }
}

FlagType FlagType::parse(const std::string& text) {
  std::vector<int> q;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw DomainError("flag type: cannot parse '" + text + "'");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw DomainError("flag type: cannot parse '" + text + "'");
    q.push_back(value);
  }
  return FlagType(std::move(q));
}

std::string FlagType::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < q_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(q_[i]);
  }
  return out;
}

Matrix block(const Matrix& a, const FlagType& type, int i, int j) {
  return a.block(type.offset(i), type.offset(j), type.multiplicity(i), type.multiplicity(j));
}

Matrix column_block(const Matrix& a, const FlagType& type, int i) {
  return a.middleCols(type.offset(i), type.multiplicity(i));
}

Matrix standard_projector(const FlagType& type, int i) {
  Matrix p = Matrix::Zero(type.dim(), type.dim());
  p.block(type.offset(i), type.offset(i), type.multiplicity(i), type.multiplicity(i)).setIdentity();
  return p;
}

double flag_invariant_error(const Flag& flag) {
  const int r = flag.blocks();
  Matrix sum = Matrix::Zero(flag.dim(), flag.dim());
  double worst = 0.0;
  for (int i = 0; i < r; ++i) {
    sum += flag[i].matrix();
    for (int j = i + 1; j < r; ++j) worst = std::max(worst, (flag[i].matrix() * flag[j].matrix()).norm());
  }
  return std::max(worst, (sum - Matrix::Identity(flag.dim(), flag.dim())).norm());
}

Flag::Flag(FlagType type, std::vector<Projector> components)
    : type_(std::move(type)), components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != type_.blocks()) {
    throw DomainError("flag: number of projectors does not match the type");
  }
  for (int i = 0; i < type_.blocks(); ++i) {
    if (components_[i].dim() != type_.dim() || components_[i].rank() != type_.multiplicity(i)) {
      throw DomainError("flag: projector " + std::to_string(i) + " has the wrong rank or dimension");
    }
  }
  if (flag_invariant_error(*this) > kFlagTol) {
    throw DomainError("flag: projectors are not mutually orthogonal or do not sum to the identity");
  }
}

BlockScaling::BlockScaling(FlagType type, Matrix scalars) : type_(std::move(type)), scalars_(std::move(scalars)) {
  const int r = type_.blocks();
  if (scalars_.rows() != r || scalars_.cols() != r) throw DomainError("block scaling: expected r x r scalars");
  for (int i = 0; i < r; ++i) {
    if (scalars_(i, i) != 1.0) throw DomainError("block scaling: diagonal blocks must be the identity");
    for (int j = 0; j < r; ++j) {
      if (!(scalars_(i, j) > 0.0) || !std::isfinite(scalars_(i, j))) {
        throw DomainError("block scaling: scalars must be positive and finite");
      }
    }
  }
}

BlockScaling BlockScaling::identity(const FlagType& type) {
  return BlockScaling(type, Matrix::Ones(type.blocks(), type.blocks()));
}

Vector BlockScaling::diagonal(int i) const {
  Vector k(type_.dim());
  for (int j = 0; j < type_.blocks(); ++j) {
    k.segment(type_.offset(j), type_.multiplicity(j)).setConstant(scalars_(i, j));
  }
  return k;
}

Flag standard_flag(const FlagType& type) {
  std::vector<Projector> comps;
  for (int i = 0; i < type.blocks(); ++i) comps.push_back(Projector::from_matrix(standard_projector(type, i)));
  return Flag(type, std::move(comps));
}

Flag flag_from_orthogonal(const Matrix& q, const FlagType& type) {
  if (q.rows() != type.dim() || !is_orthogonal(q)) {
    throw DomainError("flag_from_orthogonal: expected a d x d orthogonal matrix");
  }
  std::vector<Projector> comps;
  for (int i = 0; i < type.blocks(); ++i) {
    const Matrix u = column_block(q, type, i);
    comps.push_back(Projector::from_matrix(symmetrize(u * u.transpose())));
  }
  return Flag(type, std::move(comps));
}

Matrix flag_representative(const Flag& flag) {
  Matrix q(flag.dim(), flag.dim());
  for (int i = 0; i < flag.blocks(); ++i) {
    q.middleCols(flag.type().offset(i), flag.type().multiplicity(i)) = range_basis(flag[i]);
  }
  return q;
}

Flag flag_of_eigenspaces(const Matrix& s, const FlagType& type) {
  if (s.rows() != type.dim()) throw DomainError("flag_of_eigenspaces: dimension does not match the type");
  const SymEig eig = sym_eig_desc(s);
  const double scale = std::max(eig.values.cwiseAbs().maxCoeff(), 1.0);
  for (int i = 0; i + 1 < type.blocks(); ++i) {
    const int last = type.offset(i + 1) - 1;
    if ((eig.values[last] - eig.values[last + 1]) / scale <= kPsiGapTol) {
      throw GapError("flag_of_eigenspaces: no spectral gap between blocks " + std::to_string(i) + " and " +
                     std::to_string(i + 1));
    }
  }
  std::vector<Projector> comps;
  for (int i = 0; i < type.blocks(); ++i) {
    const Matrix u = column_block(eig.vectors, type, i);
    comps.push_back(Projector::from_matrix(symmetrize(u * u.transpose())));
  }
  return Flag(type, std::move(comps));
}

Flag group_action(const Matrix& q, const Flag& flag) {
  std::vector<Projector> comps;
  for (const Projector& p : flag.components()) comps.push_back(conjugate(q, p));
  return Flag(flag.type(), std::move(comps));
}

double extrinsic_distance(const Flag& f, const Flag& g) {
  if (!(f.type() == g.type())) throw DomainError("extrinsic_distance: flags have different types");
  double sum = 0.0;
  for (int i = 0; i < f.blocks(); ++i) {
    if (in_cut_locus(f[i], g[i])) {
      throw CutLocusError("extrinsic_distance: component " + std::to_string(i) + " is in the cut locus", i);
    }
    sum += grass_log(f[i], g[i]).delta.squaredNorm();
  }
  return std::sqrt(sum);
}

double k_discrepancy(const BlockScaling& k, const Matrix& q, const Flag& r) {
  const FlagType& type = r.type();
  if (!(k.type() == type)) throw DomainError("k_discrepancy: scaling and flag types differ");
  if (q.rows() != type.dim() || !is_orthogonal(q)) throw DomainError("k_discrepancy: expected an orthogonal Q");

  double sum = 0.0;
  for (int i = 0; i < type.blocks(); ++i) {
    // Y'Z with Y = I^(i) and Z = Q' basis(R_i).
    const Matrix cross = column_block(q, type, i).transpose() * range_basis(r[i]);
    if (Eigen::JacobiSVD<Matrix>(cross).singularValues().minCoeff() < kCutLocusTol) {
      throw CutLocusError("k_discrepancy: component " + std::to_string(i) + " is in the cut locus", i);
    }
    const Matrix moved = symmetrize(q.transpose() * r[i].matrix() * q);
    const Matrix log = detail::grass_log_unchecked(standard_projector(type, i), moved);
    const Vector ki = k.diagonal(i);
    sum += (ki.asDiagonal() * log * ki.asDiagonal()).squaredNorm();
  }
  return std::sqrt(sum);
}

double k_discrepancy(const BlockScaling& k, const Flag& p, const Flag& r) {
  if (!(p.type() == r.type())) throw DomainError("k_discrepancy: flags have different types");
  return k_discrepancy(k, flag_representative(p), r);
}

nlohmann::json flag_to_json(const Flag& flag) {
  nlohmann::json doc;
  doc["type"] = flag.type().multiplicities();
  nlohmann::json projectors = nlohmann::json::array();
  for (const Projector& p : flag.components()) {
    std::vector<double> rows;
    rows.reserve(static_cast<std::size_t>(p.dim() * p.dim()));
    for (int i = 0; i < p.dim(); ++i) {
      for (int j = 0; j < p.dim(); ++j) rows.push_back(p.matrix()(i, j));
    }
    projectors.push_back(rows);
  }
  doc["projectors"] = projectors;
  return doc;
}

Flag flag_from_json(const nlohmann::json& doc) {
  try {
    FlagType type(doc.at("type").get<std::vector<int>>());
    const auto& projectors = doc.at("projectors");
    if (!projectors.is_array() || static_cast<int>(projectors.size()) != type.blocks()) {
      throw DomainError("flag json: projector count does not match the type");
    }
    const int d = type.dim();
    std::vector<Projector> comps;
    for (const auto& entry : projectors) {
      const auto values = entry.get<std::vector<double>>();
      if (static_cast<int>(values.size()) != d * d) throw DomainError("flag json: projector has the wrong size");
      Matrix p(d, d);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) p(i, j) = values[static_cast<std::size_t>(i * d + j)];
      }
      comps.push_back(Projector::from_matrix(p));
    }
    return Flag(type, std::move(comps));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("flag json: ") + e.what());
  }
}

}  // namespace flagstat
