#pragma once

// Spectral basis of the grid Gram matrix and the truncated feature vectors
//   mu^j_l = sqrt(ell_l) * (v_l . beta^j),  l = 1..d, j = 1..n
// that are the coordinates of a regridded field on the orthonormal basis
// {sqrt(lambda_l) psi^j_l} of the vector-valued RKHS.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "currents/regrid.hpp"

namespace currents {

inline constexpr double kDefaultRankTol = 1e-10;

struct SpectralBasis {
  Vector eigvals;   // ell_1 >= ell_2 >= ... >= 0, all N of them
  Matrix eigvecs;   // N x k orthonormal columns, k >= rank_d
  int rank_d = 0;   // #{l : ell_l > rank_tol * ell_1}
  double rank_tol = kDefaultRankTol;
  std::shared_ptr<const Grid> grid;  // may be null for a bare Gram matrix
  KernelConfig kernel;

  std::size_t size() const { return static_cast<std::size_t>(eigvals.size()); }
  /// Nystrom estimates ell_l / N of the integral-operator eigenvalues.
  Vector op_eigvals() const { return eigvals / static_cast<double>(eigvals.size()); }
  /// Length of a feature vector: n * d.
  int feature_dim() const;
};

/// Full symmetric eigendecomposition, sorted descending. Eigenvalues that
/// come out slightly negative are clamped to 0. Each eigenvector is signed so
/// its largest-magnitude entry (lowest index on ties) is positive.
SpectralBasis eigendecompose(const GramMatrix& gram, double rank_tol = kDefaultRankTol,
                             std::shared_ptr<const Grid> grid = nullptr);

struct FeatureVector {
  Vector mu;  // (mu^1_1, .., mu^n_1, mu^1_2, .., mu^n_d)
  std::string shape_id;
};

FeatureVector features(const RegriddedField& field, const SpectralBasis& basis);

/// Row k holds features(fields[k]).
Matrix feature_matrix(std::span<const RegriddedField> fields, const SpectralBasis& basis);

}  // namespace currents
