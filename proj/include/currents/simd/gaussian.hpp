#pragma once

// Gaussian kernel inner loops. Every routine has a scalar reference
// implementation and, on x86-64, an AVX2+FMA variant chosen at runtime.
// This header is included by the AVX2 translation unit and must stay free
// of Eigen and other heavy templates.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace currents::simd {

inline constexpr int kMaxDim = 3;

/// Structure-of-arrays view over `count` points (or vectors) of dimension
/// `dim`: axis[a][j] is coordinate a of point j.
struct SoaView {
  std::array<const double*, kMaxDim> axis{};
  std::size_t count = 0;
  int dim = 0;
};

/// out[j] = exp(-|p_j - y|^2 * inv_lambda_sq) for every point p_j.
using GaussianRowFn = void (*)(const SoaView& points, std::span<const double> y,
                               double inv_lambda_sq, std::span<double> out);

/// out = sum_j exp(-|p_j - y|^2 * inv_lambda_sq) * w_j, out has points.dim entries.
using GaussianFieldFn = void (*)(const SoaView& points, const SoaView& weights,
                                 std::span<const double> y, double inv_lambda_sq,
                                 std::span<double> out);

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;
  GaussianRowFn gaussian_row;
  GaussianFieldFn gaussian_field;
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks the features.
const KernelTable* avx2_kernels();

// Best available table. CURRENTS_SIMD=scalar|avx2 in the environment forces
// a choice (falls back to scalar if avx2 is unavailable). Resolved once.
const KernelTable& active_kernels();

namespace detail {
const KernelTable& avx2_table();
}  // namespace detail

}  // namespace currents::simd
