#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "pns/grid.hpp"
#include "pns/spectral.hpp"

using namespace pns;
using spectral::Complex;

namespace {

VectorField3 random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  VectorField3 u(g);
  for (int c = 0; c < 3; ++c)
    for (auto& v : u.comp[c]) v = gauss(rng);
  return u;
}

double max_rel_diff(const VectorField3& a, const VectorField3& b) {
  double num = 0.0, den = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < a.comp[c].size(); ++i) {
      num = std::max(num, std::abs(a.comp[c][i] - b.comp[c][i]));
      den = std::max(den, std::abs(b.comp[c][i]));
    }
  return num / den;
}

}  // namespace

TEST_CASE("single cosine mode transforms to two conjugate coefficients") {
  const Grid g = build_grid(16, 8.0);
  const double k0 = 2.0 * std::numbers::pi / g.box_len;
  const VectorField3 u = sample_field(g, [&](double x, double, double) -> Vec3 {
    return {std::cos(3.0 * k0 * x), 0.0, 0.0};
  });
  const auto uh = spectral::forward(u);
  // Expect |coefficient| = 1/2 at (3,0,0) in the half-spectrum, everything
  // else negligible (mirror -3 is implicit in r2c storage).
  const int nzh = g.n / 2 + 1;
  double at_mode = 0.0, elsewhere = 0.0;
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < nzh; ++iz) {
        const double m = std::abs(uh.comp[0][(static_cast<std::size_t>(ix) * g.n + iy) * nzh + iz]);
        if (ix == 3 && iy == 0 && iz == 0)
          at_mode = m;
        else
          elsewhere = std::max(elsewhere, m);
      }
  CHECK(at_mode == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(elsewhere <= 1e-14);
}

TEST_CASE("transform round-trip on random data") {
  const Grid g = build_grid(16, 4.0);
  std::mt19937_64 rng(5);
  const VectorField3 u = random_field(g, rng);
  const VectorField3 u2 = spectral::inverse(spectral::forward(u));
  CHECK(max_rel_diff(u2, u) <= 1e-12);
}

TEST_CASE("Parseval identity against direct sums") {
  const Grid g = build_grid(16, 8.0);
  std::mt19937_64 rng(6);
  const VectorField3 u = random_field(g, rng);
  long double phys = 0.0L;
  for (int c = 0; c < 3; ++c)
    for (double v : u.comp[c]) phys += v * v;
  phys *= g.cell_measure;
  const double spec = spectral::l2_norm(spectral::forward(u));
  CHECK(std::abs(std::sqrt(static_cast<double>(phys)) - spec) / spec <= 1e-10);
}

TEST_CASE("Leray projection") {
  const Grid g = build_grid(16, 8.0);
  const double k0 = 2.0 * std::numbers::pi / g.box_len;

  SUBCASE("annihilates gradients") {
    // grad of sin(k.x) is a pure gradient field.
    const VectorField3 gradphi = sample_field(g, [&](double x, double y, double z) -> Vec3 {
      const double phase = k0 * (2.0 * x + y - z);
      return {2.0 * k0 * std::cos(phase), k0 * std::cos(phase), -k0 * std::cos(phase)};
    });
    auto gh = spectral::forward(gradphi);
    const double before = spectral::max_mode_norm(gh);
    spectral::leray_project(gh);
    CHECK(spectral::max_mode_norm(gh) <= 1e-12 * before);
  }

  SUBCASE("leaves divergence-free single modes unchanged") {
    const VectorField3 u = sample_field(g, [&](double x, double, double) -> Vec3 {
      return {0.0, std::cos(2.0 * k0 * x), 0.0};  // k = (2,0,0) _|_ e_y
    });
    auto uh = spectral::forward(u);
    const auto uh0 = uh;
    spectral::leray_project(uh);
    CHECK(spectral::max_mode_norm(spectral::sub(uh, uh0)) <= 1e-14);
  }

  SUBCASE("idempotent and divergence-annihilating on random fields") {
    std::mt19937_64 rng(9);
    auto uh = spectral::forward(random_field(g, rng));
    spectral::leray_project(uh);
    CHECK(spectral::max_divergence(uh) <= 1e-12 * spectral::max_mode_norm(uh));
    auto uh2 = uh;
    spectral::leray_project(uh2);
    CHECK(spectral::max_mode_norm(spectral::sub(uh2, uh)) <=
          1e-12 * spectral::max_mode_norm(uh));
  }
}

TEST_CASE("heat propagator") {
  const Grid g = build_grid(16, 8.0);
  const double k0 = 2.0 * std::numbers::pi / g.box_len;

  SUBCASE("single mode decays by exp(-|k|^2 t)") {
    const VectorField3 u = sample_field(g, [&](double x, double y, double) -> Vec3 {
      return {0.0, 0.0, std::cos(k0 * (x + 2.0 * y))};
    });
    const double t = 0.37;
    const VectorField3 ut = spectral::inverse(spectral::heat_propagated(spectral::forward(u), t));
    const double factor = std::exp(-5.0 * k0 * k0 * t);
    CHECK(max_rel_diff(ut, scaled(u, factor)) <= 1e-12);
  }

  SUBCASE("t = 0 is the identity") {
    std::mt19937_64 rng(10);
    const VectorField3 u = random_field(g, rng);
    auto uh = spectral::forward(u);
    spectral::heat_propagate(uh, 0.0);
    CHECK(max_rel_diff(spectral::inverse(uh), u) <= 1e-12);
  }

  SUBCASE("negative t rejected") {
    spectral::SpectralVectorField3 uh(g);
    CHECK_THROWS_AS(spectral::heat_propagate(uh, -0.1), std::invalid_argument);
  }

  SUBCASE("semigroup composition") {
    std::mt19937_64 rng(11);
    auto uh = spectral::forward(random_field(g, rng));
    const auto a = spectral::heat_propagated(spectral::heat_propagated(uh, 0.4), 0.35);
    const auto b = spectral::heat_propagated(uh, 0.75);
    CHECK(spectral::max_mode_norm(spectral::sub(a, b)) <=
          1e-13 * spectral::max_mode_norm(b));
  }
}

TEST_CASE("heat evolution of a narrow Gaussian matches the closed form") {
  const Grid g = build_grid(64, 16.0);
  const double sigma = 0.5, t = 0.2;
  const VectorField3 u = sample_field(g, [&](double x, double y, double z) -> Vec3 {
    return {std::exp(-0.5 * (x * x + y * y + z * z) / (sigma * sigma)), 0.0, 0.0};
  });
  const double s2 = sigma * sigma + 2.0 * t;
  const VectorField3 want = sample_field(g, [&](double x, double y, double z) -> Vec3 {
    const double amp = std::pow(sigma * sigma / s2, 1.5);
    return {amp * std::exp(-0.5 * (x * x + y * y + z * z) / s2), 0.0, 0.0};
  });
  const VectorField3 got =
      spectral::inverse(spectral::heat_propagated(spectral::forward(u), t));
  CHECK(max_rel_diff(got, want) <= 1e-6);
}

TEST_CASE("oseen_apply") {
  const Grid g = build_grid(16, 8.0);
  const double k0 = 2.0 * std::numbers::pi / g.box_len;

  SUBCASE("alpha = 0 on divergence-free input equals heat") {
    const VectorField3 u = sample_field(g, [&](double x, double, double) -> Vec3 {
      return {0.0, std::cos(k0 * x), 0.0};
    });
    const auto uh = spectral::forward(u);
    const auto a = spectral::oseen_apply(uh, 0.3, {0, 0, 0});
    const auto b = spectral::heat_propagated(uh, 0.3);
    CHECK(spectral::max_mode_norm(spectral::sub(a, b)) <=
          1e-13 * spectral::max_mode_norm(b));
  }

  SUBCASE("gradient input gives zero for any derivative") {
    const VectorField3 gradphi = sample_field(g, [&](double x, double y, double) -> Vec3 {
      const double phase = k0 * (x + y);
      return {k0 * std::cos(phase), k0 * std::cos(phase), 0.0};
    });
    const auto gh = spectral::forward(gradphi);
    for (const std::array<int, 3>& alpha :
         {std::array<int, 3>{0, 0, 0}, {1, 0, 0}, {0, 1, 1}}) {
      const auto out = spectral::oseen_apply(gh, 0.2, alpha);
      CHECK(spectral::max_mode_norm(out) <= 1e-12 * spectral::max_mode_norm(gh));
    }
  }

  SUBCASE("single mode with alpha = (1,0,0) matches the hand multiplier") {
    const double A = 0.8, t = 0.15;
    const VectorField3 u = sample_field(g, [&](double x, double, double) -> Vec3 {
      return {0.0, A * std::cos(k0 * x), 0.0};
    });
    // (ik_x) P e^{-k^2 t} on the k = (k0,0,0) cosine: y-component
    // -> -A k0 e^{-k0^2 t} sin(k0 x).
    const VectorField3 want = sample_field(g, [&](double x, double, double) -> Vec3 {
      return {0.0, -A * k0 * std::exp(-k0 * k0 * t) * std::sin(k0 * x), 0.0};
    });
    const VectorField3 got =
        spectral::inverse(spectral::oseen_apply(spectral::forward(u), t, {1, 0, 0}));
    CHECK(max_rel_diff(got, want) <= 1e-12);
  }

  SUBCASE("validation") {
    spectral::SpectralVectorField3 uh(g);
    CHECK_THROWS_AS(spectral::oseen_apply(uh, 0.0, {0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(spectral::oseen_apply(uh, 0.1, {2, 1, 0}), std::invalid_argument);
  }
}

TEST_CASE("advection divergence") {
  const Grid g = build_grid(16, 8.0);
  const double k0 = 2.0 * std::numbers::pi / g.box_len;

  SUBCASE("constants advect to zero") {
    const VectorField3 u =
        sample_field(g, [](double, double, double) -> Vec3 { return {1.0, 2.0, -0.5}; });
    const VectorField3 out = spectral::advection_divergence(u, u);
    CHECK(max_abs(out) <= 1e-13);
  }

  SUBCASE("two-mode product lands at the sum frequency") {
    const VectorField3 u = sample_field(g, [&](double x, double, double) -> Vec3 {
      return {0.0, std::cos(k0 * x), 0.0};
    });
    const VectorField3 v = sample_field(g, [&](double, double y, double) -> Vec3 {
      return {0.0, 0.0, std::cos(2.0 * k0 * y)};
    });
    // [div(u (x) v)]_z = d_y(u_y v_z) = -2 k0 cos(k0 x) sin(2 k0 y).
    const VectorField3 want = sample_field(g, [&](double x, double y, double) -> Vec3 {
      return {0.0, 0.0, -2.0 * k0 * std::cos(k0 * x) * std::sin(2.0 * k0 * y)};
    });
    const VectorField3 got = spectral::advection_divergence(u, v);
    CHECK(max_rel_diff(got, want) <= 1e-12);
  }

  SUBCASE("products beyond the 2/3 cutoff are removed exactly") {
    // n = 16 keeps |m| <= 5. cos(3y) cos(4y) = (cos 7y + cos y)/2; the 7-mode
    // is masked, leaving d_y of cos(y)/2 only.
    const VectorField3 u = sample_field(g, [&](double, double y, double) -> Vec3 {
      return {0.0, std::cos(3.0 * k0 * y), 0.0};
    });
    const VectorField3 v = sample_field(g, [&](double, double y, double) -> Vec3 {
      return {0.0, 0.0, std::cos(4.0 * k0 * y)};
    });
    const VectorField3 want = sample_field(g, [&](double, double y, double) -> Vec3 {
      return {0.0, 0.0, -0.5 * k0 * std::sin(k0 * y)};
    });
    const VectorField3 got = spectral::advection_divergence(u, v);
    CHECK(max_rel_diff(got, want) <= 1e-12);
  }

  SUBCASE("divergence form integrates to zero") {
    std::mt19937_64 rng(13);
    const VectorField3 u = random_field(g, rng);
    const VectorField3 v = random_field(g, rng);
    const VectorField3 out = spectral::advection_divergence(u, v);
    for (int c = 0; c < 3; ++c) {
      long double mean = 0.0L, scale = 0.0L;
      for (double x : out.comp[c]) {
        mean += x;
        scale += std::abs(x);
      }
      CHECK(std::abs(static_cast<double>(mean)) <=
            1e-10 * std::max(1.0, static_cast<double>(scale)));
    }
  }

  SUBCASE("grid mismatch rejected") {
    const Grid g2 = build_grid(16, 4.0);
    CHECK_THROWS_AS(spectral::advection_divergence(VectorField3(g), VectorField3(g2)),
                    std::invalid_argument);
  }
}

TEST_CASE("multiplier wrapper routes to the same operators") {
  const Grid g = build_grid(16, 8.0);
  std::mt19937_64 rng(17);
  const auto uh = spectral::forward(random_field(g, rng));

  auto a = uh;
  spectral::Multiplier::heat(0.5).apply(a);
  const auto b = spectral::heat_propagated(uh, 0.5);
  CHECK(spectral::max_mode_norm(spectral::sub(a, b)) <= 1e-15 * spectral::max_mode_norm(b));

  auto c = uh;
  spectral::Multiplier::leray().apply(c);
  CHECK(spectral::max_divergence(c) <= 1e-12 * spectral::max_mode_norm(c));

  auto d = uh;
  spectral::Multiplier::dealias_mask().apply(d);
  CHECK(spectral::max_mode_norm(d) <= spectral::max_mode_norm(uh));
}
