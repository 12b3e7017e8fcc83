#include "currents/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "currents/error.hpp"

namespace currents {
namespace {

// Vertices that make up the contour, without a closing duplicate.
std::size_t distinct_count(const Polyline2D& poly) {
  return has_closing_duplicate(poly) ? poly.vertices.size() - 1 : poly.vertices.size();
}

template <class Vec>
bool all_finite(const std::vector<Vec>& pts) {
  return std::all_of(pts.begin(), pts.end(), [](const Vec& v) { return v.allFinite(); });
}

template <class Vec>
double bbox_diagonal(const std::vector<Vec>& pts) {
  if (pts.empty()) return 0.0;
  Vec lo = pts.front();
  Vec hi = pts.front();
  for (const Vec& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

}  // namespace

bool has_closing_duplicate(const Polyline2D& poly) {
  return poly.vertices.size() >= 2 && poly.vertices.front() == poly.vertices.back();
}

void validate(const Polyline2D& poly) {
  if (!all_finite(poly.vertices)) throw InvalidInput("polyline has non-finite coordinates");
  if (poly.closed && distinct_count(poly) < 3)
    throw InvalidInput("closed polyline needs at least 3 distinct vertices, got " +
                       std::to_string(distinct_count(poly)));
  if (poly.vertices.size() < 2) throw InvalidInput("polyline needs at least 2 vertices");
  const auto& first = poly.vertices.front();
  if (std::all_of(poly.vertices.begin(), poly.vertices.end(),
                  [&](const Eigen::Vector2d& v) { return v == first; }))
    throw InvalidInput("polyline vertices are all identical");
}

void validate(const TriMesh3D& mesh) {
  if (mesh.triangles.empty()) throw InvalidInput("mesh has no triangles");
  if (!all_finite(mesh.vertices)) throw InvalidInput("mesh has non-finite coordinates");
  const int nv = static_cast<int>(mesh.vertices.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int idx : tri) {
      if (idx < 0 || idx >= nv)
        throw InvalidInput("triangle " + std::to_string(t) + " has vertex index " +
                           std::to_string(idx) + " out of range [0, " + std::to_string(nv) + ")");
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw InvalidInput("triangle " + std::to_string(t) + " repeats a vertex index");
  }
}

void validate(const DiscretizedShape& shape) {
  if (shape.ambient_dim != 2 && shape.ambient_dim != 3)
    throw InvalidInput("ambient dimension must be 2 or 3, got " + std::to_string(shape.ambient_dim));
  if (shape.centers.rows() < 1) throw InvalidInput("shape '" + shape.source_id + "' has no atoms");
  if (shape.centers.rows() != shape.taus.rows())
    throw InvalidInput("shape '" + shape.source_id + "' has mismatched center/tau counts");
  if (shape.centers.cols() != shape.ambient_dim || shape.taus.cols() != shape.ambient_dim)
    throw DimensionMismatch("shape '" + shape.source_id + "' vectors do not match ambient dimension");
  if (!shape.centers.allFinite() || !shape.taus.allFinite())
    throw InvalidInput("shape '" + shape.source_id + "' has non-finite values");
}

double signed_area(const Polyline2D& poly) {
  const std::size_t n = distinct_count(poly);
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly.vertices[i];
    const auto& b = poly.vertices[(i + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

Polyline2D reversed(const Polyline2D& poly) {
  Polyline2D out = poly;
  std::reverse(out.vertices.begin(), out.vertices.end());
  return out;
}

bool orient_ccw(Polyline2D& poly) {
  if (signed_area(poly) >= 0.0) return false;
  std::reverse(poly.vertices.begin(), poly.vertices.end());
  return true;
}

DiscretizedShape discretize_contour(const Polyline2D& poly, std::string source_id) {
  if (!poly.closed) throw InvalidInput("discretize_contour requires a closed polyline (got an open one)");
  validate(poly);

  const std::size_t p = poly.vertices.size();
  const std::size_t segments = has_closing_duplicate(poly) ? p - 1 : p;
  const double min_length = 1e-12 * diameter(poly);

  std::vector<std::size_t> kept;
  kept.reserve(segments);
  for (std::size_t j = 0; j < segments; ++j) {
    const auto& a = poly.vertices[j];
    const auto& b = poly.vertices[(j + 1) % p];
    if ((b - a).norm() > min_length) kept.push_back(j);
  }

  DiscretizedShape shape;
  shape.ambient_dim = 2;
  shape.source_id = std::move(source_id);
  shape.stats.dropped = segments - kept.size();
  shape.centers.resize(static_cast<Eigen::Index>(kept.size()), 2);
  shape.taus.resize(static_cast<Eigen::Index>(kept.size()), 2);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const std::size_t j = kept[i];
    const auto& a = poly.vertices[j];
    const auto& b = poly.vertices[(j + 1) % p];
    const auto row = static_cast<Eigen::Index>(i);
    shape.centers.row(row) = (0.5 * (a + b)).transpose();
    shape.taus.row(row) = (b - a).transpose();
  }
  return shape;
}

DiscretizedShape discretize_mesh(const TriMesh3D& mesh, std::string source_id) {
  validate(mesh);
  const double diam = diameter(mesh);
  const double min_norm = 1e-12 * diam * diam;

  std::vector<Eigen::Vector3d> centers;
  std::vector<Eigen::Vector3d> taus;
  centers.reserve(mesh.triangles.size());
  taus.reserve(mesh.triangles.size());
  for (const auto& tri : mesh.triangles) {
    const auto& a = mesh.vertices[static_cast<std::size_t>(tri[0])];
    const auto& b = mesh.vertices[static_cast<std::size_t>(tri[1])];
    const auto& c = mesh.vertices[static_cast<std::size_t>(tri[2])];
    const Eigen::Vector3d tau = (b - a).cross(c - a);
    if (tau.norm() <= min_norm) continue;
    centers.push_back((a + b + c) / 3.0);
    taus.push_back(tau);
  }

  DiscretizedShape shape;
  shape.ambient_dim = 3;
  shape.source_id = std::move(source_id);
  shape.stats.dropped = mesh.triangles.size() - centers.size();
  if (centers.empty()) throw InvalidInput("mesh '" + shape.source_id + "' has only degenerate triangles");
  shape.centers.resize(static_cast<Eigen::Index>(centers.size()), 3);
  shape.taus.resize(static_cast<Eigen::Index>(centers.size()), 3);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    shape.centers.row(static_cast<Eigen::Index>(i)) = centers[i].transpose();
    shape.taus.row(static_cast<Eigen::Index>(i)) = taus[i].transpose();
  }
  return shape;
}

double perimeter(const Polyline2D& poly) {
  const std::size_t n = distinct_count(poly);
  double total = 0.0;
  const std::size_t segments = poly.closed ? n : n - 1;
  for (std::size_t i = 0; i < segments; ++i)
    total += (poly.vertices[(i + 1) % n] - poly.vertices[i]).norm();
  return total;
}

Polyline2D resample_contour(const Polyline2D& poly, int p) {
  if (p < 3) throw InvalidInput("resample_contour needs p >= 3, got " + std::to_string(p));
  if (!poly.closed) throw InvalidInput("resample_contour requires a closed polyline");
  validate(poly);

  // Closed loop as an explicit vertex chain ending back at the first vertex.
  std::vector<Eigen::Vector2d> loop(poly.vertices.begin(),
                                    poly.vertices.begin() + static_cast<std::ptrdiff_t>(distinct_count(poly)));
  loop.push_back(loop.front());

  std::vector<double> cumulative(loop.size(), 0.0);
  for (std::size_t i = 1; i < loop.size(); ++i)
    cumulative[i] = cumulative[i - 1] + (loop[i] - loop[i - 1]).norm();
  const double total = cumulative.back();

  Polyline2D out;
  out.closed = true;
  out.vertices.reserve(static_cast<std::size_t>(p));
  const int distinct = p - 1;
  std::size_t seg = 0;
  for (int i = 0; i < distinct; ++i) {
    const double s = total * static_cast<double>(i) / static_cast<double>(distinct);
    while (seg + 2 < loop.size() && cumulative[seg + 1] <= s) ++seg;
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double t = len > 0.0 ? std::clamp((s - cumulative[seg]) / len, 0.0, 1.0) : 0.0;
    out.vertices.push_back(loop[seg] + t * (loop[seg + 1] - loop[seg]));
  }
  out.vertices.push_back(out.vertices.front());
  return out;
}

Eigen::Vector2d vertex_mean(const Polyline2D& poly) {
  const std::size_t n = distinct_count(poly);
  if (n == 0) throw InvalidInput("cannot take the mean of an empty polyline");
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < n; ++i) sum += poly.vertices[i];
  return sum / static_cast<double>(n);
}

Eigen::Vector3d vertex_mean(const TriMesh3D& mesh) {
  if (mesh.vertices.empty()) throw InvalidInput("cannot take the mean of an empty mesh");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& v : mesh.vertices) sum += v;
  return sum / static_cast<double>(mesh.vertices.size());
}

Polyline2D center_shape(const Polyline2D& poly) {
  const Eigen::Vector2d mean = vertex_mean(poly);
  Polyline2D out = poly;
  for (auto& v : out.vertices) v -= mean;
  return out;
}

TriMesh3D center_shape(const TriMesh3D& mesh) {
  const Eigen::Vector3d mean = vertex_mean(mesh);
  TriMesh3D out = mesh;
  for (auto& v : out.vertices) v -= mean;
  return out;
}

Polyline2D scale_shape(const Polyline2D& poly, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw InvalidInput("scale factor must be positive and finite");
  Polyline2D out = poly;
  for (auto& v : out.vertices) v *= factor;
  return out;
}

TriMesh3D scale_shape(const TriMesh3D& mesh, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw InvalidInput("scale factor must be positive and finite");
  TriMesh3D out = mesh;
  for (auto& v : out.vertices) v *= factor;
  return out;
}

double diameter(const Polyline2D& poly) { return bbox_diagonal(poly.vertices); }
double diameter(const TriMesh3D& mesh) { return bbox_diagonal(mesh.vertices); }

Vector tau_sum(const DiscretizedShape& shape) { return shape.taus.colwise().sum().transpose(); }

}  // namespace currents
