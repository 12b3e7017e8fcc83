#include "currents/kernel.hpp"

#include <cmath>

#include "currents/error.hpp"

namespace currents {
namespace {

void require_same_dim(const DiscretizedShape& a, const DiscretizedShape& b) {
  if (a.ambient_dim != b.ambient_dim)
    throw DimensionMismatch("shapes live in different dimensions (" + std::to_string(a.ambient_dim) +
                            " vs " + std::to_string(b.ambient_dim) + ")");
}

}  // namespace

KernelConfig KernelConfig::gaussian(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw InvalidInput("kernel bandwidth lambda must be positive and finite");
  return KernelConfig(KernelFamily::gaussian, lambda);
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::gaussian:
      return "gaussian";
  }
  return "unknown";
}

double eval_scalar(std::span<const double> x, std::span<const double> y, const KernelConfig& config) {
  if (x.size() != y.size())
    throw DimensionMismatch("kernel arguments have dimensions " + std::to_string(x.size()) + " and " +
                            std::to_string(y.size()));
  double d2 = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double d = x[a] - y[a];
    d2 += d * d;
  }
  return std::exp(-d2 * config.inv_lambda_sq());
}

GramMatrix gram(const PointMatrix& points, const KernelConfig& config) {
  if (points.rows() < 1) throw InvalidInput("gram needs at least one point");
  if (points.cols() < 1 || points.cols() > simd::kMaxDim)
    throw DimensionMismatch("gram supports point dimensions 1..3");
  const Eigen::Index n = points.rows();
  const auto& kernels = simd::active_kernels();
  const double inv = config.inv_lambda_sq();

  GramMatrix g{Matrix(n, n), points, config};
  Vector y(points.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    // Tail i..n-1 of row i, written into column i (column-major storage).
    simd::SoaView tail = soa_view(points);
    for (int a = 0; a < tail.dim; ++a) tail.axis[a] += i;
    tail.count = static_cast<std::size_t>(n - i);
    y = points.row(i).transpose();
    kernels.gaussian_row(tail, std::span<const double>(y.data(), y.size()), inv,
                         std::span<double>(g.values.col(i).data() + i, tail.count));
  }
  g.values.triangularView<Eigen::StrictlyUpper>() = g.values.transpose();
  return g;
}

Matrix eval_field_at(const DiscretizedShape& shape, const PointMatrix& at, const KernelConfig& config) {
  if (at.cols() != shape.ambient_dim)
    throw DimensionMismatch("evaluation points have dimension " + std::to_string(at.cols()) +
                            " but the shape lives in dimension " + std::to_string(shape.ambient_dim));
  const auto& kernels = simd::active_kernels();
  const simd::SoaView atoms = soa_view(shape.centers);
  const simd::SoaView weights = soa_view(shape.taus);
  const double inv = config.inv_lambda_sq();

  // Row-major scratch so each evaluation writes one contiguous output.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(at.rows(), at.cols());
  Vector y(at.cols());
  for (Eigen::Index i = 0; i < at.rows(); ++i) {
    y = at.row(i).transpose();
    kernels.gaussian_field(atoms, weights, std::span<const double>(y.data(), y.size()), inv,
                           std::span<double>(out.row(i).data(), static_cast<std::size_t>(at.cols())));
  }
  return out;
}

Vector eval_field(const DiscretizedShape& shape, std::span<const double> y, const KernelConfig& config) {
  if (static_cast<int>(y.size()) != shape.ambient_dim)
    throw DimensionMismatch("evaluation point has dimension " + std::to_string(y.size()) +
                            " but the shape lives in dimension " + std::to_string(shape.ambient_dim));
  PointMatrix at(1, shape.ambient_dim);
  for (int a = 0; a < shape.ambient_dim; ++a) at(0, a) = y[static_cast<std::size_t>(a)];
  return eval_field_at(shape, at, config).row(0).transpose();
}

double current_inner(const DiscretizedShape& s1, const DiscretizedShape& s2, const KernelConfig& config) {
  require_same_dim(s1, s2);
  // <phi1, phi2> = sum_i tau1_i . phi2(x1_i)
  const Matrix field = eval_field_at(s2, s1.centers, config);
  return s1.taus.cwiseProduct(field).sum();
}

double current_distance(const DiscretizedShape& s1, const DiscretizedShape& s2, const KernelConfig& config) {
  require_same_dim(s1, s2);
  const double radicand = current_inner(s1, s1, config) - 2.0 * current_inner(s1, s2, config) +
                          current_inner(s2, s2, config);
  if (radicand < -1e-10)
    throw NumericalFailure("current distance radicand is negative (" + std::to_string(radicand) + ")");
  return radicand <= 0.0 ? 0.0 : std::sqrt(radicand);
}

double default_lambda(std::span<const DiscretizedShape> shapes) {
  if (shapes.empty()) throw InvalidInput("default_lambda needs at least one shape");
  const int dim = shapes.front().ambient_dim;
  Vector mean = Vector::Zero(dim);
  Eigen::Index count = 0;
  for (const auto& s : shapes) {
    if (s.ambient_dim != dim) throw DimensionMismatch("default_lambda: shapes of mixed dimension");
    mean += s.centers.colwise().sum().transpose();
    count += s.centers.rows();
  }
  if (count == 0) throw InvalidInput("default_lambda: no points");
  mean /= static_cast<double>(count);
  double ss = 0.0;
  for (const auto& s : shapes) ss += (s.centers.rowwise() - mean.transpose()).squaredNorm();
  const double sd = std::sqrt(ss / static_cast<double>(count));
  if (!(sd > 0.0)) throw InvalidInput("default_lambda: all points are identical, bandwidth would be zero");
  return sd;
}

}  // namespace currents
