#include "currents/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>

#include "currents/error.hpp"
#include "currents/io.hpp"

namespace currents::synth {
namespace {

constexpr int kDenseSamples = 720;

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

std::vector<std::size_t> permutation(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
  return idx;
}

template <class Radial>
Polyline2D dense_closed_curve(Radial point_at, double rotation) {
  Polyline2D poly;
  poly.closed = true;
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  for (int i = 0; i < kDenseSamples; ++i) {
    const double t = 2.0 * std::numbers::pi * i / kDenseSamples;
    const Eigen::Vector2d p = point_at(t);
    poly.vertices.emplace_back(c * p.x() - s * p.y(), s * p.x() + c * p.y());
  }
  return poly;
}

double signed_pow(double v, double e) { return std::copysign(std::pow(std::abs(v), e), v); }

Polyline2D make_ellipse(std::mt19937_64& rng) {
  const double a = 62.0 * uniform(rng, 0.94, 1.06);
  const double b = 40.0 * uniform(rng, 0.94, 1.06);
  const double rot = uniform(rng, -1.0, 1.0) * 4.0 * std::numbers::pi / 180.0;
  return dense_closed_curve([&](double t) { return Eigen::Vector2d(a * std::cos(t), b * std::sin(t)); }, rot);
}

Polyline2D make_rounded_rect(std::mt19937_64& rng) {
  const double a = 55.0 * uniform(rng, 0.94, 1.06);
  const double b = 38.0 * uniform(rng, 0.94, 1.06);
  const double rot = uniform(rng, -1.0, 1.0) * 4.0 * std::numbers::pi / 180.0;
  // Superellipse |x/a|^4 + |y/b|^4 = 1.
  return dense_closed_curve(
      [&](double t) { return Eigen::Vector2d(a * signed_pow(std::cos(t), 0.5), b * signed_pow(std::sin(t), 0.5)); },
      rot);
}

Polyline2D make_star(std::mt19937_64& rng) {
  const double radius = 48.0 * uniform(rng, 0.95, 1.05);
  const double amp = 0.22 * uniform(rng, 0.9, 1.1);
  const double phase = uniform(rng, -0.1, 0.1);
  return dense_closed_curve(
      [&](double t) {
        const double r = radius * (1.0 + amp * std::cos(5.0 * t + phase));
        return Eigen::Vector2d(r * std::cos(t), r * std::sin(t));
      },
      0.0);
}

// "<family>-<index>" stem, index parsed numerically.
bool split_stem(const std::string& stem, std::string& family, long& index) {
  const auto dash = stem.rfind('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 == stem.size()) return false;
  family = stem.substr(0, dash);
  const char* first = stem.data() + dash + 1;
  const char* last = stem.data() + stem.size();
  auto [ptr, ec] = std::from_chars(first, last, index);
  return ec == std::errc() && ptr == last;
}

}  // namespace

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

void apply_size_protocol(std::vector<SynthContour>& family, std::mt19937_64& rng) {
  const std::size_t n = family.size();
  const auto order = permutation(rng, n);
  // The enlarged group gets floor(n/2) members.
  for (std::size_t i = 0; i < n / 2; ++i) family[order[i]].enlarged = true;
  for (auto& c : family) {
    c.label = c.family + (c.enlarged ? "-large" : "-small");
    c.jitter_scale = uniform(rng, 1.0, 1.1);
    Polyline2D poly = c.poly;
    orient_ccw(poly);
    if (c.enlarged) poly = scale_shape(poly, kEnlargeFactor);
    poly = scale_shape(poly, c.jitter_scale);
    poly = resample_contour(poly, kContourPoints);
    c.poly = center_shape(poly);
  }
}

std::vector<SynthContour> surrogate_contours(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  struct Family {
    const char* name;
    int count;
    Polyline2D (*make)(std::mt19937_64&);
  };
  const Family families[] = {{"ellipse", 20, &make_ellipse}, {"rounded-rect", 20, &make_rounded_rect},
                             {"star", 18, &make_star}};
  std::vector<SynthContour> out;
  for (const auto& fam : families) {
    std::vector<SynthContour> group;
    for (int i = 0; i < fam.count; ++i) {
      SynthContour c;
      char name[64];
      std::snprintf(name, sizeof(name), "%s-%02d", fam.name, i + 1);
      c.name = name;
      c.family = fam.name;
      c.poly = fam.make(rng);
      group.push_back(std::move(c));
    }
    apply_size_protocol(group, rng);
    out.insert(out.end(), group.begin(), group.end());
  }
  return out;
}

std::vector<SynthContour> traced_contours(const std::filesystem::path& dir, std::uint64_t seed) {
  namespace fs = std::filesystem;
  if (dir.empty() || !fs::is_directory(dir))
    throw InvalidInput("traced contour source directory '" + dir.string() + "' does not exist");
  std::map<std::string, std::map<long, fs::path>> families;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    std::string family;
    long index = 0;
    if (split_stem(entry.path().stem().string(), family, index)) families[family][index] = entry.path();
  }
  if (families.empty())
    throw InvalidInput("no '<family>-<index>.csv' contours found in '" + dir.string() + "'");

  std::mt19937_64 rng(seed);
  std::vector<SynthContour> out;
  for (const auto& [family, files] : families) {
    std::vector<SynthContour> group;
    for (const auto& [index, path] : files) {
      SynthContour c;
      c.name = path.stem().string();
      c.family = family;
      c.poly = io::read_contour_csv(path);
      if (!c.poly.closed) c.poly.closed = true;  // traced outlines are closed by construction
      group.push_back(std::move(c));
    }
    apply_size_protocol(group, rng);
    out.insert(out.end(), group.begin(), group.end());
  }
  return out;
}

TriMesh3D icosphere(int level) {
  if (level < 0 || level > 6) throw InvalidInput("icosphere level must be in [0, 6]");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh3D mesh;
  mesh.vertices = {{-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                   {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : mesh.vertices) v.normalize();
  mesh.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                    {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                    {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      const Eigen::Vector3d m = (mesh.vertices[static_cast<std::size_t>(a)] + mesh.vertices[static_cast<std::size_t>(b)])
                                    .normalized();
      mesh.vertices.push_back(m);
      const int idx = static_cast<int>(mesh.vertices.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(mesh.triangles.size() * 4);
    for (const auto& tri : mesh.triangles) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    mesh.triangles = std::move(next);
  }
  return mesh;
}

TriMesh3D ellipsoid(const Eigen::Vector3d& semi_axes, int level) {
  TriMesh3D mesh = icosphere(level);
  for (auto& v : mesh.vertices) v = v.cwiseProduct(semi_axes);
  return mesh;
}

std::vector<SynthMesh> ellipsoid_suite(std::uint64_t seed, int per_family, int level) {
  if (per_family < 1) throw InvalidInput("ellipsoid_suite needs at least one mesh per family");
  std::mt19937_64 rng(seed);
  struct Family {
    const char* label;
    Eigen::Vector3d axes;
  };
  const Family families[] = {{"ellipsoid-compact", {50.0, 40.0, 30.0}}, {"ellipsoid-elongated", {72.0, 45.0, 45.0}}};
  std::vector<SynthMesh> out;
  for (const auto& fam : families) {
    for (int i = 0; i < per_family; ++i) {
      Eigen::Vector3d axes = fam.axes;
      for (int a = 0; a < 3; ++a) axes[a] *= uniform(rng, 0.96, 1.04);
      axes *= uniform(rng, 1.0, 1.1);
      char name[64];
      std::snprintf(name, sizeof(name), "%s-%02d", fam.label, i + 1);
      out.push_back({name, fam.label, ellipsoid(axes, level)});
    }
  }
  return out;
}

}  // namespace currents::synth
