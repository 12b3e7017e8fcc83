#pragma once

// Shared fixtures for the test suites.

#include <cmath>
#include <numbers>
#include <random>

#include "currents/geometry.hpp"

namespace testing_support {

using currents::DiscretizedShape;
using currents::Polyline2D;

inline double uni(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Star-shaped polygon with random radii, counterclockwise, no closing duplicate.
inline Polyline2D random_polygon(std::mt19937_64& rng, int n, double radius = 1.0) {
  Polyline2D poly;
  poly.closed = true;
  const double cx = uni(rng, -2, 2), cy = uni(rng, -2, 2);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * (i + uni(rng, 0.0, 0.5)) / n;
    const double r = radius * uni(rng, 0.5, 1.5);
    poly.vertices.emplace_back(cx + r * std::cos(t), cy + r * std::sin(t));
  }
  return poly;
}

inline Polyline2D regular_polygon(int n, double radius = 1.0) {
  Polyline2D poly;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    poly.vertices.emplace_back(radius * std::cos(t), radius * std::sin(t));
  }
  return poly;
}

/// Arbitrary (not closed) current with random atoms.
inline DiscretizedShape random_shape(std::mt19937_64& rng, int dim, int atoms, double spread = 1.0) {
  DiscretizedShape s;
  s.ambient_dim = dim;
  s.centers.resize(atoms, dim);
  s.taus.resize(atoms, dim);
  for (int i = 0; i < atoms; ++i)
    for (int a = 0; a < dim; ++a) {
      s.centers(i, a) = uni(rng, -spread, spread);
      s.taus(i, a) = uni(rng, -1.0, 1.0);
    }
  return s;
}

inline DiscretizedShape single_atom(std::initializer_list<double> x, std::initializer_list<double> tau) {
  DiscretizedShape s;
  s.ambient_dim = static_cast<int>(x.size());
  s.centers.resize(1, s.ambient_dim);
  s.taus.resize(1, s.ambient_dim);
  int a = 0;
  for (double v : x) s.centers(0, a++) = v;
  a = 0;
  for (double v : tau) s.taus(0, a++) = v;
  return s;
}

}  // namespace testing_support
