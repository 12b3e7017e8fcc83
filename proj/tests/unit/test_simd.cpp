#include <doctest.h>

#include <cfloat>
#include <cmath>
#include <random>
#include <vector>

#include "currents/simd/gaussian.hpp"

using namespace currents::simd;

namespace {

struct Soa {
  std::vector<double> data[kMaxDim];
  SoaView view(int dim) const {
    SoaView v;
    v.dim = dim;
    v.count = data[0].size();
    for (int a = 0; a < dim; ++a) v.axis[a] = data[a].data();
    return v;
  }
};

Soa random_soa(std::mt19937_64& rng, std::size_t count, int dim, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  Soa s;
  for (int a = 0; a < kMaxDim; ++a) {
    s.data[a].resize(count);
    for (auto& x : s.data[a]) x = a < dim ? u(rng) : 0.0;
  }
  return s;
}

}  // namespace

TEST_CASE("scalar table is always available and active table is consistent") {
  CHECK(scalar_kernels().isa == Isa::scalar);
  const KernelTable& active = active_kernels();
  if (avx2_kernels() == nullptr) CHECK(active.isa == Isa::scalar);
  MESSAGE("active kernels: " << active.name);
}

TEST_CASE("scalar row matches direct exp") {
  std::mt19937_64 rng(41);
  const Soa p = random_soa(rng, 37, 2, 3.0);
  const double y[] = {0.3, -0.2};
  std::vector<double> out(37);
  scalar_kernels().gaussian_row(p.view(2), std::span<const double>(y, 2), 0.7, out);
  for (std::size_t j = 0; j < 37; ++j) {
    const double dx = p.data[0][j] - y[0], dy = p.data[1][j] - y[1];
    CHECK(out[j] == std::exp(-(dx * dx + dy * dy) * 0.7));
  }
}

TEST_CASE("avx2 row matches scalar reference for every tail length and dimension") {
  const KernelTable* avx = avx2_kernels();
  if (avx == nullptr) {
    MESSAGE("AVX2 not available on this machine; equivalence test skipped");
    return;
  }
  std::mt19937_64 rng(42);
  for (int dim = 1; dim <= 3; ++dim) {
    for (std::size_t count = 0; count <= 33; ++count) {
      for (double spread : {0.01, 1.0, 10.0, 60.0}) {
        const Soa p = random_soa(rng, count, dim, spread);
        const double y[3] = {0.1, -0.4, 0.25};
        const double inv = 1.0 / 2.3;
        std::vector<double> ref(count + 1, -7.0), got(count + 1, -7.0);
        scalar_kernels().gaussian_row(p.view(dim), std::span<const double>(y, dim), inv,
                                      std::span<double>(ref.data(), count));
        avx->gaussian_row(p.view(dim), std::span<const double>(y, dim), inv, std::span<double>(got.data(), count));
        for (std::size_t j = 0; j < count; ++j) {
          // exp amplifies the rounding of its argument z by z, and the two paths
          // round the sum of squares differently (FMA). Underflow far in the tail.
          double z = 0.0;
          for (int a = 0; a < dim; ++a) z += (p.data[a][j] - y[a]) * (p.data[a][j] - y[a]);
          z *= inv;
          const double tol = (4e-16 + (dim + 2) * DBL_EPSILON * z) * ref[j] + 1e-300;
          CHECK(std::abs(got[j] - ref[j]) <= tol);
        }
        CHECK(got[count] == -7.0);  // masked store leaves the guard untouched
      }
    }
  }
}

TEST_CASE("avx2 exp over the full nonpositive range") {
  const KernelTable* avx = avx2_kernels();
  if (avx == nullptr) return;
  // One axis, y = 0, inv = 1: out = exp(-x^2); sweep x^2 over [0, 800].
  const std::size_t n = 4001;
  std::vector<double> xs(n), ref(n), got(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = std::sqrt(800.0 * static_cast<double>(i) / (n - 1));
  SoaView v;
  v.dim = 1;
  v.count = n;
  v.axis[0] = xs.data();
  const double y = 0.0;
  scalar_kernels().gaussian_row(v, std::span<const double>(&y, 1), 1.0, ref);
  avx->gaussian_row(v, std::span<const double>(&y, 1), 1.0, got);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (xs[i] * xs[i] > 708.0) {
      CHECK(got[i] <= 1e-307);
      continue;
    }
    worst = std::max(worst, std::abs(got[i] - ref[i]) / ref[i]);
  }
  CHECK(worst <= 4e-16);
}

TEST_CASE("avx2 field sum matches scalar reference") {
  const KernelTable* avx = avx2_kernels();
  if (avx == nullptr) return;
  std::mt19937_64 rng(43);
  for (int dim = 1; dim <= 3; ++dim) {
    for (std::size_t count : {0u, 1u, 3u, 4u, 5u, 8u, 13u, 100u, 257u}) {
      const Soa p = random_soa(rng, count, dim, 5.0);
      const Soa w = random_soa(rng, count, dim, 1.0);
      const double y[3] = {0.5, 0.5, -0.5};
      double ref[3] = {0, 0, 0}, got[3] = {0, 0, 0};
      scalar_kernels().gaussian_field(p.view(dim), w.view(dim), std::span<const double>(y, dim), 0.3,
                                      std::span<double>(ref, dim));
      avx->gaussian_field(p.view(dim), w.view(dim), std::span<const double>(y, dim), 0.3, std::span<double>(got, dim));
      for (int a = 0; a < dim; ++a) {
        double abs_sum = 0.0;
        for (std::size_t j = 0; j < count; ++j) abs_sum += std::abs(w.data[a][j]);
        CHECK(std::abs(got[a] - ref[a]) <= 1e-14 * (abs_sum + 1e-300));
      }
    }
  }
}
