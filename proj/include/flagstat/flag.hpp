#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "flagstat/grassmann.hpp"

namespace flagstat {

/// Multiplicities (q_1, …, q_r) of a flag, with their index blocks β_i.
class FlagType {
 public:
  /// Throws DomainError when empty or when any multiplicity is < 1.
  explicit FlagType(std::vector<int> multiplicities);
  /// Parses "q1,q2,...".
  static FlagType parse(const std::string& text);

  int blocks() const noexcept { return static_cast<int>(q_.size()); }
  int dim() const noexcept { return d_; }
  int multiplicity(int i) const { return q_.at(static_cast<std::size_t>(i)); }
  /// First index of block β_i (0-based).
  int offset(int i) const { return offset_.at(static_cast<std::size_t>(i)); }
  const std::vector<int>& multiplicities() const noexcept { return q_; }
  std::string to_string() const;

  friend bool operator==(const FlagType& a, const FlagType& b) { return a.q_ == b.q_; }

 private:
  std::vector<int> q_;
  std::vector<int> offset_;
  int d_ = 0;
};

/// Block A^(i,j) of a d×d matrix partitioned by the type.
Matrix block(const Matrix& a, const FlagType& type, int i, int j);
/// Column block A^(i) (d × q_i).
Matrix column_block(const Matrix& a, const FlagType& type, int i);
/// P_0^i = Diag(0, …, I_{q_i}, …, 0).
Matrix standard_projector(const FlagType& type, int i);

inline constexpr double kFlagTol = 1e-10;

/// Flag of type I stored as its r mutually orthogonal projectors.
class Flag {
 public:
  /// Validates ranks against the type, P_iP_j = 0 and ΣP_i = I (1e-10).
  Flag(FlagType type, std::vector<Projector> components);

  const FlagType& type() const noexcept { return type_; }
  const std::vector<Projector>& components() const noexcept { return components_; }
  const Projector& operator[](int i) const { return components_.at(static_cast<std::size_t>(i)); }
  int blocks() const noexcept { return type_.blocks(); }
  int dim() const noexcept { return type_.dim(); }

 private:
  FlagType type_;
  std::vector<Projector> components_;
};

/// Largest violation of the flag invariants: max over ‖P_iP_j‖ and ‖ΣP_i − I‖.
double flag_invariant_error(const Flag& flag);

/// Per-index block-diagonal scalings K^i. Entry (i, j) of `scalars` is the
/// constant on block β_j of K^i; the diagonal of `scalars` must be 1.
class BlockScaling {
 public:
  BlockScaling(FlagType type, Matrix scalars);
  static BlockScaling identity(const FlagType& type);

  const FlagType& type() const noexcept { return type_; }
  const Matrix& scalars() const noexcept { return scalars_; }
  /// Diagonal of K^i as a length-d vector.
  Vector diagonal(int i) const;

 private:
  FlagType type_;
  Matrix scalars_;
};

Flag standard_flag(const FlagType& type);

/// π^I(Q): component i projects onto the span of Q's column block β_i.
Flag flag_from_orthogonal(const Matrix& q, const FlagType& type);

/// Some Q ∈ O(d) with π^I(Q) = flag.
Matrix flag_representative(const Flag& flag);

/// F^I(S): component i projects onto the eigenvectors at positions β_i.
/// Throws GapError when a block-boundary gap is below tolerance.
Flag flag_of_eigenspaces(const Matrix& s, const FlagType& type);

/// Q · F = (Q P_i Q')_i.
Flag group_action(const Matrix& q, const Flag& flag);

/// sqrt Σ_i ‖Log_{P_i}(R_i)‖²_F. Throws CutLocusError naming the component.
double extrinsic_distance(const Flag& f, const Flag& g);

/// sqrt Σ_i ‖K^i Log_{P_0^i}(Q' R_i Q) K^i‖²_F, evaluated in the chart at the
/// standard flag. Depends on Q only through π^I(Q).
double k_discrepancy(const BlockScaling& k, const Matrix& q, const Flag& r);
/// Same with Q any representative of `p`.
double k_discrepancy(const BlockScaling& k, const Flag& p, const Flag& r);

/// {"type": [...], "projectors": [[row-major entries], ...]}.
nlohmann::json flag_to_json(const Flag& flag);
Flag flag_from_json(const nlohmann::json& doc);

}  // namespace flagstat
