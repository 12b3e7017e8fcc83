#include "currents/simd/gaussian.hpp"

#include <cmath>

namespace currents::simd {
namespace {

void gaussian_row_scalar(const SoaView& points, std::span<const double> y,
                         double inv_lambda_sq, std::span<double> out) {
  for (std::size_t j = 0; j < points.count; ++j) {
    double d2 = 0.0;
    for (int a = 0; a < points.dim; ++a) {
      const double d = points.axis[a][j] - y[a];
      d2 += d * d;
    }
    out[j] = std::exp(-d2 * inv_lambda_sq);
  }
}

void gaussian_field_scalar(const SoaView& points, const SoaView& weights,
                           std::span<const double> y, double inv_lambda_sq,
                           std::span<double> out) {
  std::array<double, kMaxDim> acc{};
  for (std::size_t j = 0; j < points.count; ++j) {
    double d2 = 0.0;
    for (int a = 0; a < points.dim; ++a) {
      const double d = points.axis[a][j] - y[a];
      d2 += d * d;
    }
    const double k = std::exp(-d2 * inv_lambda_sq);
    for (int a = 0; a < weights.dim; ++a) acc[a] += k * weights.axis[a][j];
  }
  for (int a = 0; a < weights.dim; ++a) out[a] = acc[a];
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::scalar, "scalar", &gaussian_row_scalar,
                                 &gaussian_field_scalar};
  return table;
}

}  // namespace currents::simd
