#pragma once

// Matrix-valued Gaussian kernel K(x, y) = exp(-|x - y|^2 / lambda^2) * I.
// Because K is a multiple of the identity, vector components never mix and
// every routine below works with the scalar factor k(x, y).

#include <span>
#include <string>
#include <vector>

#include "currents/geometry.hpp"
#include "currents/types.hpp"

namespace currents {

enum class KernelFamily { gaussian };

class KernelConfig {
 public:
  /// Throws InvalidInput unless lambda is positive and finite.
  static KernelConfig gaussian(double lambda);

  KernelFamily family() const { return family_; }
  double lambda() const { return lambda_; }
  double inv_lambda_sq() const { return 1.0 / (lambda_ * lambda_); }

  friend bool operator==(const KernelConfig&, const KernelConfig&) = default;

 private:
  KernelConfig(KernelFamily family, double lambda) : family_(family), lambda_(lambda) {}

  KernelFamily family_;
  double lambda_;
};

std::string to_string(KernelFamily family);

struct GramMatrix {
  Matrix values;       // N x N, exactly symmetric
  PointMatrix points;  // N x n generating points
  KernelConfig config;
};

double eval_scalar(std::span<const double> x, std::span<const double> y, const KernelConfig& config);

/// Gram matrix of the point set. Entries are computed once for j >= i and
/// mirrored, so the result is bitwise symmetric.
GramMatrix gram(const PointMatrix& points, const KernelConfig& config);

/// Field of the shape at y: sum_j k(x_j, y) tau_j.
Vector eval_field(const DiscretizedShape& shape, std::span<const double> y, const KernelConfig& config);

/// Field of the shape at every row of `at` (M x n result).
Matrix eval_field_at(const DiscretizedShape& shape, const PointMatrix& at, const KernelConfig& config);

/// sum_i sum_j tau1_i . k(x1_i, x2_j) tau2_j
double current_inner(const DiscretizedShape& s1, const DiscretizedShape& s2, const KernelConfig& config);

/// Norm of the difference of the two currents. Tiny negative radicands in
/// [-1e-10, 0] are clamped to zero; anything below that is a NumericalFailure.
double current_distance(const DiscretizedShape& s1, const DiscretizedShape& s2, const KernelConfig& config);

/// Total standard deviation sqrt(mean |p - mean(p)|^2) over all pooled
/// center points. Throws InvalidInput when the points are all identical.
double default_lambda(std::span<const DiscretizedShape> shapes);

}  // namespace currents
