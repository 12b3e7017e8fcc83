#pragma once

#include <Eigen/Dense>

#include "currents/simd/gaussian.hpp"

namespace currents {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Point sets are stored one point per row, column-major, so each axis is
/// contiguous and can be handed to the SIMD kernels without copying.
using PointMatrix = Eigen::MatrixXd;

inline simd::SoaView soa_view(const Eigen::MatrixXd& m) {
  simd::SoaView v;
  v.count = static_cast<std::size_t>(m.rows());
  v.dim = static_cast<int>(m.cols());
  for (int a = 0; a < v.dim && a < simd::kMaxDim; ++a) v.axis[a] = m.col(a).data();
  return v;
}

}  // namespace currents
