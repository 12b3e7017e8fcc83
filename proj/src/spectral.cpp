#include "currents/spectral.hpp"

#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "currents/error.hpp"

namespace currents {
namespace {

void check_compatible(const RegriddedField& field, const SpectralBasis& basis) {
  if (field.beta.rows() != static_cast<Eigen::Index>(basis.size()))
    throw InvalidInput("field '" + field.shape_id + "' has " + std::to_string(field.beta.rows()) +
                       " grid coefficients but the basis has " + std::to_string(basis.size()));
  if (!(field.kernel == basis.kernel))
    throw InvalidInput("field '" + field.shape_id + "' was regridded with lambda=" +
                       std::to_string(field.kernel.lambda()) + " but the basis uses lambda=" +
                       std::to_string(basis.kernel.lambda()));
  if (field.grid && basis.grid && !(field.grid->spec() == basis.grid->spec()))
    throw InvalidInput("field '" + field.shape_id + "' and the basis were built on different grids");
}

// Some OpenBLAS builds select kernels that return wrong eigenvectors on
// certain CPUs without reporting an error, so the LAPACK result is checked.
constexpr double kMaxEigenResidual = 1e-10;

std::atomic<bool> warned_fallback{false};

/// Ascending eigenpairs of the symmetric matrix g: eigenvectors in a, values in w.
void symmetric_eigen(const Matrix& g, Matrix& a, Vector& w) {
  const Eigen::Index n = g.rows();
  a = g;
  w.resize(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n), a.data(),
                                         static_cast<lapack_int>(n), w.data());
  if (info < 0) throw NumericalFailure("symmetric eigensolver failed (dsyevd info=" + std::to_string(info) + ")");
  const double scale = std::max(g.norm(), 1e-300);
  if (info == 0 && w.allFinite() && a.allFinite() &&
      (g * a - a * w.asDiagonal()).norm() <= kMaxEigenResidual * scale)
    return;

  if (!warned_fallback.exchange(true))
    std::fprintf(stderr,
                 "warning: LAPACK dsyevd returned an inaccurate eigendecomposition; using the slower built-in "
                 "solver (for OpenBLAS, setting OPENBLAS_CORETYPE to a supported core such as Haswell avoids this)\n");
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  if (es.info() != Eigen::Success) throw NumericalFailure("symmetric eigensolver did not converge");
  a = es.eigenvectors();
  w = es.eigenvalues();
}

}  // namespace

int SpectralBasis::feature_dim() const {
  const int n = grid ? grid->dim() : 0;
  return n * rank_d;
}

SpectralBasis eigendecompose(const GramMatrix& gram, double rank_tol, std::shared_ptr<const Grid> grid) {
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) throw InvalidInput("rank_tol must lie in (0, 1)");
  const Eigen::Index n = gram.values.rows();
  if (n < 1 || gram.values.cols() != n) throw InvalidInput("Gram matrix must be square and nonempty");
  if (grid && static_cast<Eigen::Index>(grid->size()) != n)
    throw DimensionMismatch("grid size does not match the Gram matrix");

  Matrix a;
  Vector w;
  symmetric_eigen(gram.values, a, w);
  if (!w.allFinite() || !a.allFinite()) throw NumericalFailure("symmetric eigensolver returned non-finite values");

  SpectralBasis basis{Vector(n), Matrix(n, n), 0, rank_tol, std::move(grid), gram.config};
  // Both solvers return ascending order.
  for (Eigen::Index l = 0; l < n; ++l) {
    const Eigen::Index src = n - 1 - l;
    basis.eigvals[l] = std::max(0.0, w[src]);
    auto v = basis.eigvecs.col(l);
    v = a.col(src);
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = std::abs(v[i]);
      if (m > best) {
        best = m;
        arg = i;
      }
    }
    if (v[arg] < 0.0) v = -v;
  }

  const double top = basis.eigvals[0];
  basis.rank_d = static_cast<int>(
      std::count_if(basis.eigvals.data(), basis.eigvals.data() + n, [&](double e) { return e > rank_tol * top; }));
  return basis;
}

FeatureVector features(const RegriddedField& field, const SpectralBasis& basis) {
  check_compatible(field, basis);
  const int d = basis.rank_d;
  const auto cols = field.beta.cols();
  // coeffs(l, j) = sqrt(ell_l) * v_l . beta^j
  Matrix coeffs = basis.eigvecs.leftCols(d).transpose() * field.beta;
  coeffs.array().colwise() *= basis.eigvals.head(d).array().sqrt();

  FeatureVector fv{Vector(d * cols), field.shape_id};
  for (int l = 0; l < d; ++l)
    for (Eigen::Index j = 0; j < cols; ++j) fv.mu[l * cols + j] = coeffs(l, j);
  return fv;
}

Matrix feature_matrix(std::span<const RegriddedField> fields, const SpectralBasis& basis) {
  const Eigen::Index dim =
      fields.empty() ? static_cast<Eigen::Index>(basis.feature_dim())
                     : static_cast<Eigen::Index>(basis.rank_d) * fields.front().beta.cols();
  Matrix out(static_cast<Eigen::Index>(fields.size()), dim);
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (fields[k].beta.cols() != fields.front().beta.cols())
      throw InvalidInput("feature_matrix: fields of mixed dimension");
    out.row(static_cast<Eigen::Index>(k)) = features(fields[k], basis).mu.transpose();
  }
  return out;
}

}  // namespace currents
