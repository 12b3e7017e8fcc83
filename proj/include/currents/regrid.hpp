#pragma once

// Common sample grid and the regularized representer solve
//   (gamma N I + K|_a) beta = b
// that re-expresses every shape's field with coefficients on the grid.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "currents/kernel.hpp"

namespace currents {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct GridSpec {
  std::vector<Interval> bounds;
  double delta = 0.0;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class Grid {
 public:
  const GridSpec& spec() const { return spec_; }
  const std::vector<Interval>& bounds() const { return spec_.bounds; }
  double delta() const { return spec_.delta; }
  int dim() const { return static_cast<int>(spec_.bounds.size()); }
  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  /// Points per axis.
  const std::vector<std::size_t>& counts() const { return counts_; }
  /// N x dim, row-major lattice order (last axis varies fastest).
  const PointMatrix& points() const { return points_; }
  /// Human-readable descriptor, e.g. "[-175,175]x[-115,115]@5".
  std::string describe() const;

 private:
  friend Grid make_grid(std::vector<Interval> bounds, double delta);
  GridSpec spec_;
  std::vector<std::size_t> counts_;
  PointMatrix points_;
};

/// Axis-aligned lattice lo + k*delta, k = 0..floor((hi-lo)/delta). A relative
/// slack of 1e-9 absorbs decimal round-off in the bounds. Throws InvalidInput
/// for degenerate intervals, nonpositive delta, or delta exceeding an axis span.
Grid make_grid(std::vector<Interval> bounds, double delta);

/// Bounding box of all shape centers, expanded by one delta per side.
std::vector<Interval> auto_bounds(std::span<const DiscretizedShape> shapes, double delta);

/// Row i is the shape's field at grid point a_i.
Matrix sample_field(const DiscretizedShape& shape, const Grid& grid, const KernelConfig& config);

struct RegriddedField {
  Matrix beta;  // N x n
  std::shared_ptr<const Grid> grid;
  double gamma = 0.0;
  KernelConfig kernel;
  double fit_residual = 0.0;  // max_i |phi_bar(a_i) - b_i|
  std::string shape_id;
};

/// Factorization of gamma N I + K|_a, built once per (grid, lambda, gamma)
/// and shared across every shape. Immutable after construction.
class RegridSolver {
 public:
  RegridSolver(std::shared_ptr<const Grid> grid, std::shared_ptr<const GramMatrix> gram, double gamma);
  RegridSolver(std::shared_ptr<const Grid> grid, const KernelConfig& config, double gamma);

  RegriddedField solve(const DiscretizedShape& shape) const;
  /// Solve for precomputed samples b (N x n).
  RegriddedField solve_samples(const Matrix& samples, std::string shape_id) const;

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  const GramMatrix& gram() const { return *gram_; }
  double gamma() const { return gamma_; }

 private:
  std::shared_ptr<const Grid> grid_;
  std::shared_ptr<const GramMatrix> gram_;
  double gamma_;
  Eigen::LLT<Matrix> llt_;
};

RegriddedField regrid(const DiscretizedShape& shape, std::shared_ptr<const Grid> grid, double gamma,
                      const KernelConfig& config);

/// sum_i k(a_i, y) beta_i
Vector reconstruct(const RegriddedField& field, std::span<const double> y);

}  // namespace currents
