#include <doctest.h>

#include <filesystem>
#include <map>

#include "currents/error.hpp"
#include "currents/io.hpp"
#include "currents/synth.hpp"
#include "support.hpp"

using namespace currents;
namespace fs = std::filesystem;

TEST_CASE("surrogate dataset: 58 contours in groups of 10/10/10/10/9/9") {
  const auto contours = synth::surrogate_contours(42);
  REQUIRE(contours.size() == 58);
  std::map<std::string, int> groups, families;
  for (const auto& c : contours) {
    ++groups[c.label];
    ++families[c.family];
  }
  CHECK(families == std::map<std::string, int>{{"ellipse", 20}, {"rounded-rect", 20}, {"star", 18}});
  CHECK(groups == std::map<std::string, int>{{"ellipse-large", 10},
                                             {"ellipse-small", 10},
                                             {"rounded-rect-large", 10},
                                             {"rounded-rect-small", 10},
                                             {"star-large", 9},
                                             {"star-small", 9}});
}

TEST_CASE("surrogate contours: 100 points, first = last, centered, counterclockwise") {
  for (const auto& c : synth::surrogate_contours(7)) {
    REQUIRE(c.poly.vertices.size() == 100);
    CHECK(c.poly.vertices.front() == c.poly.vertices.back());
    CHECK(c.poly.closed);
    CHECK(vertex_mean(c.poly).norm() <= 1e-12 * diameter(c.poly));
    CHECK(signed_area(c.poly) > 0.0);
    CHECK(c.jitter_scale >= 1.0);
    CHECK(c.jitter_scale < 1.1);
    CHECK(c.label == c.family + (c.enlarged ? "-large" : "-small"));
  }
}

TEST_CASE("enlarged contours are about 1.5x larger than their family's small ones") {
  std::map<std::string, std::pair<double, int>> large, small;
  for (const auto& c : synth::surrogate_contours(3)) {
    auto& acc = c.enlarged ? large[c.family] : small[c.family];
    acc.first += perimeter(c.poly);
    acc.second += 1;
  }
  for (const auto& [family, acc] : large) {
    const double ratio = (acc.first / acc.second) / (small[family].first / small[family].second);
    CHECK(ratio > 1.3);
    CHECK(ratio < 1.7);
  }
}

TEST_CASE("surrogate generation is deterministic per seed") {
  const auto a = synth::surrogate_contours(42);
  const auto b = synth::surrogate_contours(42);
  const auto c = synth::surrogate_contours(43);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].label == b[i].label);
    for (std::size_t v = 0; v < a[i].poly.vertices.size(); ++v) {
      CHECK(a[i].poly.vertices[v] == b[i].poly.vertices[v]);
      any_diff = any_diff || a[i].poly.vertices[v] != c[i].poly.vertices[v];
    }
  }
  CHECK(any_diff);
}

TEST_CASE("uniform variates stay in range") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = synth::uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("traced mode: missing directory is rejected, files are grouped by family") {
  CHECK_THROWS_AS(synth::traced_contours("/nonexistent/currents/traced", 1), InvalidInput);
  const fs::path dir = fs::temp_directory_path() / "currents_test_traced";
  fs::remove_all(dir);
  fs::create_directories(dir);
  CHECK_THROWS_AS(synth::traced_contours(dir, 1), InvalidInput);

  std::mt19937_64 rng(6);
  for (const char* fam : {"bat", "key"})
    for (int i = 1; i <= 4; ++i) {
      Polyline2D p = testing_support::random_polygon(rng, 60, 40.0);
      if (i % 2) p = reversed(p);
      io::write_contour_csv(dir / (std::string(fam) + "-" + std::to_string(i) + ".csv"), p);
    }
  io::write_contour_csv(dir / "readme.csv", testing_support::regular_polygon(5));
  const auto out = synth::traced_contours(dir, 1);
  REQUIRE(out.size() == 8);
  std::map<std::string, int> groups;
  for (const auto& c : out) {
    ++groups[c.label];
    CHECK(c.poly.vertices.size() == 100);
    CHECK(signed_area(c.poly) > 0.0);
  }
  CHECK(groups == std::map<std::string, int>{{"bat-large", 2}, {"bat-small", 2}, {"key-large", 2}, {"key-small", 2}});
  CHECK(out[0].name == "bat-1");
}

TEST_CASE("icosphere: counts, closure and outward orientation at every level") {
  for (int level = 0; level <= 4; ++level) {
    const TriMesh3D m = synth::icosphere(level);
    const std::size_t faces = 20u << (2 * level);
    CHECK(m.triangles.size() == faces);
    CHECK(m.vertices.size() == faces / 2 + 2);
    const auto s = discretize_mesh(m);
    CHECK(tau_sum(s).norm() <= 1e-12 * s.taus.rowwise().norm().maxCoeff() * static_cast<double>(s.size()));
    double volume = 0.0;
    for (const auto& t : m.triangles)
      volume += m.vertices[t[0]].dot(m.vertices[t[1]].cross(m.vertices[t[2]])) / 6.0;
    CHECK(volume > 0.0);
  }
  CHECK_THROWS_AS(synth::icosphere(-1), InvalidInput);
  CHECK_THROWS_AS(synth::icosphere(7), InvalidInput);
}

TEST_CASE("ellipsoid suite: two labeled families with seeded jitter") {
  const auto suite = synth::ellipsoid_suite(9, 20, 2);
  REQUIRE(suite.size() == 40);
  std::map<std::string, int> counts;
  for (const auto& m : suite) ++counts[m.label];
  CHECK(counts == std::map<std::string, int>{{"ellipsoid-compact", 20}, {"ellipsoid-elongated", 20}});
  const auto again = synth::ellipsoid_suite(9, 20, 2);
  CHECK(again[5].mesh.vertices == suite[5].mesh.vertices);
  CHECK(suite[0].mesh.vertices != suite[1].mesh.vertices);
}
