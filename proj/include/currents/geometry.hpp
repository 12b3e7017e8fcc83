#pragma once

// Raw contours and meshes, their preprocessing transforms, and conversion to
// discrete currents: a list of centers x_j carrying vectors tau_j.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "currents/types.hpp"

namespace currents {

struct Polyline2D {
  std::vector<Eigen::Vector2d> vertices;
  bool closed = true;
};

struct TriMesh3D {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;
};

/// Bookkeeping produced while building a DiscretizedShape.
struct DiscretizeStats {
  std::size_t dropped = 0;  // degenerate segments or triangles removed
  bool reoriented = false;  // contour was clockwise and got reversed on ingestion
};

struct DiscretizedShape {
  int ambient_dim = 0;
  PointMatrix centers;  // N x n
  Matrix taus;          // N x n
  std::string source_id;
  std::optional<std::string> label;
  DiscretizeStats stats;

  std::size_t size() const { return static_cast<std::size_t>(centers.rows()); }
};

/// Throws InvalidInput unless the polyline is usable as a closed contour
/// (>= 3 vertices, finite coordinates, not all vertices identical).
void validate(const Polyline2D& poly);
void validate(const TriMesh3D& mesh);

/// Throws InvalidInput when the shape breaks its structural invariants.
void validate(const DiscretizedShape& shape);

/// True when the last vertex repeats the first exactly.
bool has_closing_duplicate(const Polyline2D& poly);

/// Shoelace signed area; positive for counterclockwise contours.
double signed_area(const Polyline2D& poly);

Polyline2D reversed(const Polyline2D& poly);

/// Reverses clockwise contours. Returns true when a flip happened.
bool orient_ccw(Polyline2D& poly);

/// Segment midpoints and edge vectors. A closing duplicate y_p == y_1 yields
/// p-1 segments, otherwise the contour wraps around (p segments).
DiscretizedShape discretize_contour(const Polyline2D& poly, std::string source_id = {});

/// Triangle barycenters and (b-a) x (c-a) area vectors.
DiscretizedShape discretize_mesh(const TriMesh3D& mesh, std::string source_id = {});

/// p points at equal arclength spacing starting at the first vertex; the
/// last point repeats the first, so p-1 of them are distinct.
Polyline2D resample_contour(const Polyline2D& poly, int p);

double perimeter(const Polyline2D& poly);

/// Moves the vertex mean to the origin. A closing duplicate is not counted
/// twice.
Polyline2D center_shape(const Polyline2D& poly);
TriMesh3D center_shape(const TriMesh3D& mesh);

Polyline2D scale_shape(const Polyline2D& poly, double factor);
TriMesh3D scale_shape(const TriMesh3D& mesh, double factor);

Eigen::Vector2d vertex_mean(const Polyline2D& poly);
Eigen::Vector3d vertex_mean(const TriMesh3D& mesh);

/// Largest pairwise distance bound: the bounding-box diagonal.
double diameter(const Polyline2D& poly);
double diameter(const TriMesh3D& mesh);

/// Sum of all tau_j.
Vector tau_sum(const DiscretizedShape& shape);

}  // namespace currents
