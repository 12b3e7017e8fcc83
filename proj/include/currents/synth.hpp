#pragma once

// Seeded synthetic datasets.
//
// The 2D protocol takes three shape families of 20/20/18 contours, enlarges
// a seeded half of each family by 1.5 (the "large" group, the rest is
// "small"), multiplies every contour by a random factor in [1, 1.1],
// resamples it to 100 points with the first point repeated last, and centers
// it. Labels are "<family>-small" / "<family>-large": six groups of
// 10/10/10/10/9/9.
//
// Randomness comes from std::mt19937_64, whose output is fixed by the
// standard; uniform variates are built from its raw bits, so files are
// byte-identical across platforms for a given seed.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "currents/geometry.hpp"

namespace currents::synth {

inline constexpr int kContourPoints = 100;
inline constexpr double kEnlargeFactor = 1.5;

/// Uniform double in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double lo, double hi);

struct SynthContour {
  std::string name;    // e.g. "star-07"
  std::string family;  // e.g. "star"
  std::string label;   // e.g. "star-large"
  bool enlarged = false;
  double jitter_scale = 1.0;
  Polyline2D poly;
};

/// Built-in surrogate families "ellipse", "rounded-rect", "star" (20/20/18).
std::vector<SynthContour> surrogate_contours(std::uint64_t seed);

/// Traced polylines from `dir`: files named "<family>-<index>.csv" in the
/// contour CSV format. Families are processed in lexicographic order, files
/// by numeric index. Throws InvalidInput if the directory is missing or empty.
std::vector<SynthContour> traced_contours(const std::filesystem::path& dir, std::uint64_t seed);

/// Applies the enlarge / jitter / resample / center protocol to one family's
/// raw contours, in place.
void apply_size_protocol(std::vector<SynthContour>& family, std::mt19937_64& rng);

/// Unit icosphere with outward-oriented triangles; level 0 is the icosahedron.
TriMesh3D icosphere(int level);

/// Axis-aligned ellipsoid mesh with the given semi-axes.
TriMesh3D ellipsoid(const Eigen::Vector3d& semi_axes, int level);

struct SynthMesh {
  std::string name;
  std::string label;
  TriMesh3D mesh;
};

/// Two ellipsoid families differing in scale and aspect, `per_family` meshes
/// each, with seeded per-axis and overall scale jitter.
std::vector<SynthMesh> ellipsoid_suite(std::uint64_t seed, int per_family = 20, int level = 2);

}  // namespace currents::synth
