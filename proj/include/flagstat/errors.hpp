#pragma once

#include <stdexcept>
#include <string>

namespace flagstat {

/// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative kernel failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pair of subspaces lies in each other's cut locus, so the Grassmann
/// logarithm is undefined. `component()` is the flag index when known, else -1.
class CutLocusError : public DomainError {
 public:
  explicit CutLocusError(const std::string& what, int component = -1)
      : DomainError(what), component_(component) {}
  int component() const noexcept { return component_; }

 private:
  int component_;
};

/// Spectral gap at a flag block boundary is too small to separate eigenspaces.
class GapError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Two adjacent estimated block eigenvalues coincide.
class DegenerateScalingError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace flagstat
