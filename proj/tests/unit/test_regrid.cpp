#include <doctest.h>

#include <cmath>

#include "currents/error.hpp"
#include "currents/regrid.hpp"
#include "support.hpp"

using namespace currents;
using testing_support::random_shape;
using testing_support::single_atom;
using testing_support::uni;

namespace {

std::shared_ptr<const Grid> shared_grid(std::vector<Interval> b, double delta) {
  return std::make_shared<const Grid>(make_grid(std::move(b), delta));
}

DiscretizedShape test_contour() {
  Polyline2D p = testing_support::regular_polygon(30, 3.0);
  for (auto& v : p.vertices) v.x() *= 1.4;
  return discretize_contour(p, "ellipse");
}

}  // namespace

TEST_CASE("grid cardinalities") {
  const Grid g2 = make_grid({{-175, 175}, {-115, 115}}, 5);
  CHECK(g2.size() == 3337);
  CHECK(g2.counts() == std::vector<std::size_t>{71, 47});

  const Grid g3 = make_grid({{-472.73, 487.27}, {-824.72, 735.28}, {-156.70, 203.30}}, 120);
  CHECK(g3.size() == 504);
  CHECK(g3.counts() == std::vector<std::size_t>{9, 14, 4});

  const Grid g = make_grid({{0, 10}, {0, 10}}, 5);
  CHECK(g.size() == 9);
}

TEST_CASE("grid ordering is row-major, last axis fastest") {
  const Grid g = make_grid({{0, 10}, {0, 10}}, 5);
  const double expected[9][2] = {{0, 0}, {0, 5}, {0, 10}, {5, 0}, {5, 5}, {5, 10}, {10, 0}, {10, 5}, {10, 10}};
  for (int i = 0; i < 9; ++i) {
    CHECK(g.points()(i, 0) == expected[i][0]);
    CHECK(g.points()(i, 1) == expected[i][1]);
  }
  CHECK(g.describe() == "[0,10]x[0,10]@5");
}

TEST_CASE("property: grid count formula and lattice coverage") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 3);
    const double delta = uni(rng, 0.3, 2.0);
    std::vector<Interval> b;
    std::size_t expected = 1;
    for (int a = 0; a < dim; ++a) {
      const double lo = uni(rng, -5, 0);
      const double hi = lo + uni(rng, delta * 1.01, 8.0);
      b.push_back({lo, hi});
      expected *= static_cast<std::size_t>(std::floor((hi - lo) / delta)) + 1;
    }
    const Grid g = make_grid(b, delta);
    CHECK(g.size() == expected);
    for (std::size_t i = 0; i < g.size(); ++i)
      for (int a = 0; a < dim; ++a) {
        const double k = (g.points()(static_cast<Eigen::Index>(i), a) - b[a].lo) / delta;
        CHECK(std::abs(k - std::round(k)) <= 1e-9);
        CHECK(g.points()(static_cast<Eigen::Index>(i), a) <= b[a].hi + 1e-9);
      }
  }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(make_grid({{0, 10}, {0, 3}}, 5), InvalidInput);
  CHECK_THROWS_AS(make_grid({{0, 10}}, 0.0), InvalidInput);
  CHECK_THROWS_AS(make_grid({{0, 10}}, -1.0), InvalidInput);
  CHECK_THROWS_AS(make_grid({{1, 1}}, 0.5), InvalidInput);
  CHECK_THROWS_AS(make_grid({{2, 1}}, 0.5), InvalidInput);
  CHECK_THROWS_AS(make_grid({}, 0.5), InvalidInput);
}

TEST_CASE("auto bounds pad the center bounding box by one delta") {
  std::vector<DiscretizedShape> shapes{single_atom({-1, 2}, {1, 0}), single_atom({3, -4}, {0, 1})};
  const auto b = auto_bounds(shapes, 0.5);
  REQUIRE(b.size() == 2);
  CHECK(b[0] == Interval{-1.5, 3.5});
  CHECK(b[1] == Interval{-4.5, 2.5});
}

TEST_CASE("sample field examples") {
  const Grid g = make_grid({{0, 10}, {0, 10}}, 5);
  const auto cfg = KernelConfig::gaussian(0.1);
  const auto s = single_atom({5, 5}, {1, 0});
  const Matrix b = sample_field(s, g, cfg);
  CHECK(b(4, 0) == 1.0);
  CHECK(b(4, 1) == 0.0);
  CHECK(b.row(0).norm() < 1e-300);

  DiscretizedShape zero = s;
  zero.taus.setZero();
  CHECK(sample_field(zero, g, cfg).isZero(0.0));

  std::mt19937_64 rng(52);
  const auto r = random_shape(rng, 2, 20, 6.0);
  const auto c2 = KernelConfig::gaussian(3.0);
  const Matrix br = sample_field(r, g, c2);
  for (Eigen::Index i = 0; i < 9; ++i) {
    const double y[2] = {g.points()(i, 0), g.points()(i, 1)};
    const Vector e = eval_field(r, y, c2);
    CHECK((br.row(i).transpose() - e).norm() <= 1e-12 * (1.0 + e.norm()));
  }
  const auto r3 = random_shape(rng, 3, 4);
  CHECK_THROWS_AS(sample_field(r3, g, c2), DimensionMismatch);
}

TEST_CASE("decoupled grid points: beta = b / (gamma N + 1)") {
  // Grid points 100 lambda apart make K|_a the identity, so each point is the
  // scalar system (gamma N + 1) beta_i = b_i.
  auto grid = shared_grid({{0, 100}}, 100);
  REQUIRE(grid->size() == 2);
  const RegridSolver solver(grid, KernelConfig::gaussian(1.0), 0.25);
  Matrix b(2, 1);
  b << 3.0, -1.0;
  const auto f = solver.solve_samples(b, "x");
  CHECK(f.beta(0, 0) == doctest::Approx(3.0 / 1.5).epsilon(1e-15));
  CHECK(f.beta(1, 0) == doctest::Approx(-1.0 / 1.5).epsilon(1e-15));
}

TEST_CASE("zero samples give zero coefficients") {
  auto grid = shared_grid({{0, 4}, {0, 4}}, 1);
  const RegridSolver solver(grid, KernelConfig::gaussian(1.0), 1e-3);
  const auto f = solver.solve_samples(Matrix::Zero(25, 2), "z");
  CHECK(f.beta.isZero(0.0));
  CHECK(f.fit_residual == 0.0);
}

TEST_CASE("solve matches explicit dense inversion on N=10") {
  std::mt19937_64 rng(53);
  auto grid = shared_grid({{0, 1}, {0, 4}}, 1);
  REQUIRE(grid->size() == 10);
  for (double gamma : {1e-1, 1e-3, 1e-5}) {
    const auto cfg = KernelConfig::gaussian(1.3);
    const auto s = random_shape(rng, 2, 15, 2.0);
    const auto f = regrid(s, grid, gamma, cfg);
    const Matrix K = gram(grid->points(), cfg).values;
    const Matrix A = gamma * 10.0 * Matrix::Identity(10, 10) + K;
    const Matrix oracle = A.inverse() * sample_field(s, *grid, cfg);
    CHECK((f.beta - oracle).norm() <= 1e-10 * oracle.norm());
  }
}

TEST_CASE("reconstruct examples") {
  auto one = shared_grid({{2, 102}, {3, 103}}, 100);
  REQUIRE(one->size() == 4);
  RegriddedField f{Matrix::Constant(4, 2, 9.0), one, 1e-3, KernelConfig::gaussian(1.0), 0.0, "p"};
  f.beta.row(0) << 0.5, -1.5;
  const double y[2] = {2, 3};
  const Vector r = reconstruct(f, y);
  CHECK(r(0) == 0.5);
  CHECK(r(1) == -1.5);

  std::mt19937_64 rng(54);
  auto grid = shared_grid({{-2, 2}, {-2, 2}}, 0.5);
  const auto cfg = KernelConfig::gaussian(0.7);
  const double gamma = 1e-4;
  const auto s = random_shape(rng, 2, 25, 1.5);
  const RegridSolver solver(grid, cfg, gamma);
  const auto fa = solver.solve(s);
  const auto fb = solver.solve(random_shape(rng, 2, 25, 1.5));
  RegriddedField sum = fa;
  sum.beta = fa.beta + fb.beta;
  const double yy[2] = {0.3, -0.9};
  CHECK((reconstruct(sum, yy) - reconstruct(fa, yy) - reconstruct(fb, yy)).norm() <= 1e-12);

  // At grid points: K beta == b - gamma N beta.
  const Matrix b = sample_field(s, *grid, cfg);
  const double N = static_cast<double>(grid->size());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(grid->size()); ++i) {
    const double at[2] = {grid->points()(i, 0), grid->points()(i, 1)};
    const Vector rec = reconstruct(fa, at);
    const Vector expect = (b.row(i) - gamma * N * fa.beta.row(i)).transpose();
    CHECK((rec - expect).norm() <= 1e-9 * (1.0 + b.norm()));
  }
}

TEST_CASE("property: fit residual is non-increasing as gamma decreases") {
  auto grid = shared_grid({{-6, 6}, {-6, 6}}, 0.5);
  const auto cfg = KernelConfig::gaussian(0.6);
  const auto s = test_contour();
  double prev = INFINITY;
  for (double gamma : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const auto f = regrid(s, grid, gamma, cfg);
    CHECK(f.fit_residual <= prev + 1e-12);
    prev = f.fit_residual;
  }
}

TEST_CASE("property: interpolation limit at gamma = 1e-12 with lambda near delta") {
  auto grid = shared_grid({{-6, 6}, {-6, 6}}, 0.5);
  const auto cfg = KernelConfig::gaussian(0.5);
  const auto s = test_contour();
  const auto f = regrid(s, grid, 1e-12, cfg);
  const double bmax = sample_field(s, *grid, cfg).rowwise().norm().maxCoeff();
  CHECK(f.fit_residual < 1e-6 * bmax);
}

TEST_CASE("property: shrinkage as gamma grows") {
  auto grid = shared_grid({{-6, 6}, {-6, 6}}, 0.5);
  const auto cfg = KernelConfig::gaussian(0.8);
  const auto s = test_contour();
  const double big = regrid(s, grid, 1e6, cfg).beta.norm();
  const double small = regrid(s, grid, 1e-4, cfg).beta.norm();
  CHECK(big < 1e-4 * small);
}

TEST_CASE("property: solve succeeds for random gamma and lambda") {
  std::mt19937_64 rng(55);
  auto grid = shared_grid({{-3, 3}, {-3, 3}}, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const double gamma = std::pow(10.0, uni(rng, -12, 2));
    const auto cfg = KernelConfig::gaussian(uni(rng, 0.1, 5.0));
    const auto f = regrid(random_shape(rng, 2, 10, 3.0), grid, gamma, cfg);
    CHECK(f.beta.allFinite());
    CHECK(f.gamma == gamma);
    CHECK(f.beta.rows() == static_cast<Eigen::Index>(grid->size()));
  }
}

TEST_CASE("regrid validation") {
  auto grid = shared_grid({{0, 4}, {0, 4}}, 1);
  const auto cfg = KernelConfig::gaussian(1.0);
  CHECK_THROWS_AS(RegridSolver(grid, cfg, 0.0), InvalidInput);
  CHECK_THROWS_AS(RegridSolver(grid, cfg, -1.0), InvalidInput);
  const RegridSolver solver(grid, cfg, 1e-3);
  CHECK_THROWS_AS(solver.solve_samples(Matrix::Zero(3, 2), "bad"), DimensionMismatch);
  std::mt19937_64 rng(56);
  CHECK_THROWS_AS(solver.solve(random_shape(rng, 3, 4)), DimensionMismatch);
}
