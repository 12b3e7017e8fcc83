#include "currents/regrid.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "currents/error.hpp"

namespace currents {

std::string Grid::describe() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t a = 0; a < spec_.bounds.size(); ++a) {
    if (a) os << 'x';
    os << '[' << spec_.bounds[a].lo << ',' << spec_.bounds[a].hi << ']';
  }
  os << '@' << spec_.delta;
  return os.str();
}

Grid make_grid(std::vector<Interval> bounds, double delta) {
  if (bounds.empty() || bounds.size() > static_cast<std::size_t>(simd::kMaxDim))
    throw InvalidInput("grid needs between 1 and 3 axes");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidInput("grid spacing delta must be positive");

  Grid grid;
  std::size_t total = 1;
  for (std::size_t a = 0; a < bounds.size(); ++a) {
    const Interval iv = bounds[a];
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.hi > iv.lo))
      throw InvalidInput("grid axis " + std::to_string(a) + " has a degenerate interval");
    const double span = iv.hi - iv.lo;
    if (delta > span * (1.0 + 1e-9))
      throw InvalidInput("grid spacing " + std::to_string(delta) + " exceeds the span of axis " +
                         std::to_string(a) + " (" + std::to_string(span) + ")");
    const auto steps = static_cast<std::size_t>(std::floor(span / delta * (1.0 + 1e-9) + 1e-9));
    grid.counts_.push_back(steps + 1);
    total *= steps + 1;
  }

  grid.spec_ = GridSpec{std::move(bounds), delta};
  const int dim = grid.dim();
  grid.points_.resize(static_cast<Eigen::Index>(total), dim);
  std::vector<std::size_t> index(static_cast<std::size_t>(dim), 0);
  for (std::size_t i = 0; i < total; ++i) {
    for (int a = 0; a < dim; ++a)
      grid.points_(static_cast<Eigen::Index>(i), a) =
          grid.spec_.bounds[static_cast<std::size_t>(a)].lo + static_cast<double>(index[static_cast<std::size_t>(a)]) * delta;
    for (int a = dim - 1; a >= 0; --a) {
      const auto ua = static_cast<std::size_t>(a);
      if (++index[ua] < grid.counts_[ua]) break;
      index[ua] = 0;
    }
  }
  return grid;
}

std::vector<Interval> auto_bounds(std::span<const DiscretizedShape> shapes, double delta) {
  if (shapes.empty()) throw InvalidInput("auto_bounds needs at least one shape");
  if (!(delta > 0.0)) throw InvalidInput("grid spacing delta must be positive");
  const int dim = shapes.front().ambient_dim;
  Vector lo = Vector::Constant(dim, std::numeric_limits<double>::infinity());
  Vector hi = Vector::Constant(dim, -std::numeric_limits<double>::infinity());
  for (const auto& s : shapes) {
    if (s.ambient_dim != dim) throw DimensionMismatch("auto_bounds: shapes of mixed dimension");
    lo = lo.cwiseMin(s.centers.colwise().minCoeff().transpose());
    hi = hi.cwiseMax(s.centers.colwise().maxCoeff().transpose());
  }
  std::vector<Interval> out;
  for (int a = 0; a < dim; ++a) out.push_back({lo[a] - delta, hi[a] + delta});
  return out;
}

Matrix sample_field(const DiscretizedShape& shape, const Grid& grid, const KernelConfig& config) {
  if (grid.dim() != shape.ambient_dim)
    throw DimensionMismatch("grid dimension " + std::to_string(grid.dim()) + " does not match shape dimension " +
                            std::to_string(shape.ambient_dim));
  return eval_field_at(shape, grid.points(), config);
}

RegridSolver::RegridSolver(std::shared_ptr<const Grid> grid, std::shared_ptr<const GramMatrix> gram, double gamma)
    : grid_(std::move(grid)), gram_(std::move(gram)), gamma_(gamma) {
  if (!grid_ || !gram_) throw InvalidInput("RegridSolver needs a grid and a Gram matrix");
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) throw InvalidInput("regularization gamma must be positive");
  const auto n = static_cast<Eigen::Index>(grid_->size());
  if (gram_->values.rows() != n) throw DimensionMismatch("Gram matrix does not match the grid size");

  Matrix system = gram_->values;
  system.diagonal().array() += gamma_ * static_cast<double>(n);
  llt_.compute(system);
  if (llt_.info() != Eigen::Success)
    throw NumericalFailure("Cholesky factorization of gamma*N*I + K failed (gamma=" + std::to_string(gamma_) +
                           ", N=" + std::to_string(n) + ")");
}

RegridSolver::RegridSolver(std::shared_ptr<const Grid> grid, const KernelConfig& config, double gamma)
    : RegridSolver(grid, std::make_shared<const GramMatrix>(currents::gram(grid->points(), config)), gamma) {}

RegriddedField RegridSolver::solve_samples(const Matrix& samples, std::string shape_id) const {
  if (samples.rows() != gram_->values.rows())
    throw DimensionMismatch("sample matrix rows do not match the grid size");
  RegriddedField field{llt_.solve(samples), grid_, gamma_, gram_->config, 0.0, std::move(shape_id)};
  if (!field.beta.allFinite()) {
    const Vector d = llt_.matrixL().toDenseMatrix().diagonal();
    const double ratio = d.maxCoeff() / d.minCoeff();
    throw NumericalFailure("regrid produced non-finite coefficients; Cholesky pivot ratio " + std::to_string(ratio));
  }
  const Matrix fitted = gram_->values * field.beta;
  field.fit_residual = (fitted - samples).rowwise().norm().maxCoeff();
  return field;
}

RegriddedField RegridSolver::solve(const DiscretizedShape& shape) const {
  return solve_samples(sample_field(shape, *grid_, gram_->config), shape.source_id);
}

RegriddedField regrid(const DiscretizedShape& shape, std::shared_ptr<const Grid> grid, double gamma,
                      const KernelConfig& config) {
  return RegridSolver(std::move(grid), config, gamma).solve(shape);
}

Vector reconstruct(const RegriddedField& field, std::span<const double> y) {
  if (!field.grid) throw InvalidInput("regridded field has no grid");
  if (static_cast<int>(y.size()) != field.grid->dim())
    throw DimensionMismatch("reconstruct: point dimension does not match the grid");
  const simd::SoaView atoms = soa_view(field.grid->points());
  const simd::SoaView weights = soa_view(field.beta);
  Vector out(field.beta.cols());
  simd::active_kernels().gaussian_field(atoms, weights, y, field.kernel.inv_lambda_sq(),
                                        std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

}  // namespace currents
