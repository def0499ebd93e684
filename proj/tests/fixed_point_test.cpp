#include "doctest.h"

#include <cmath>
#include <random>

#include "pns/fixed_point.hpp"

using namespace pns::fixedpoint;

namespace {

// Seeded R^8 instance with certified C_B = 1 (Frobenius-normalized tensor)
// and ||U|| = 1/32 so the linear bound holds with margin.
struct R8Instance {
  EuclideanSpace sp{8};
  std::vector<double> T;
  std::vector<double> U;
  std::vector<double> e0;

  explicit R8Instance(std::uint64_t seed, double eps = 0.2) : T(8 * 8 * 8) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    double fro = 0.0;
    for (auto& t : T) {
      t = gauss(rng);
      fro += t * t;
    }
    fro = std::sqrt(fro);
    for (auto& t : T) t /= fro;
    U = sp.scale(1.0 / 32.0, sp.random_unit(rng));
    e0 = sp.scale(eps, sp.random_unit(rng));
  }

  auto bilinear() const {
    return [this](const std::vector<double>& x, const std::vector<double>& y) {
      std::vector<double> r(8, 0.0);
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
          for (int k = 0; k < 8; ++k) r[i] += T[(i * 8 + j) * 8 + k] * x[j] * y[k];
      return r;
    };
  }
};

}  // namespace

TEST_CASE("zero datum fixes zero immediately") {
  ScalarSpace sp;
  auto B = [](double x, double y) { return x * y; };
  auto [e, trace] = solve_picard(sp, 0.0, B, 1.0 / 16.0, 1.0, 0.1);
  CHECK(e == 0.0);
  CHECK(trace.residual == 0.0);
  CHECK(trace.converged);
}

TEST_CASE("scalar quadratic oracle") {
  // B(x,y) = xy, U = 1/16 makes the linear part exactly e/8; the fixed point
  // solves e^2 + (9/8) e - 0.2 = 0.
  ScalarSpace sp;
  auto B = [](double x, double y) { return x * y; };
  auto [e, trace] = solve_picard(sp, 0.2, B, 1.0 / 16.0, 1.0, 0.2);
  const double want = (-9.0 / 8.0 + std::sqrt(81.0 / 64.0 + 0.8)) / 2.0;
  CHECK(std::abs(e - want) <= 1e-12);
  CHECK(e == doctest::Approx(0.15611).epsilon(1e-4));
  CHECK(trace.converged);

  SUBCASE("contraction ratio never exceeds 7/8") {
    CHECK(trace.max_ratio() <= 7.0 / 8.0 + 1e-9);
  }
  SUBCASE("ball confinement at 3 eps / 2") {
    CHECK(trace.max_norm() <= 1.5 * 0.2 + 1e-12);
  }
  SUBCASE("monotone geometric decay of successive differences") {
    double first_diff = 0.0;
    for (const auto& row : trace.rows)
      if (row.iter == 1) first_diff = row.diff_norm;
    for (const auto& row : trace.rows) {
      if (row.iter < 1 || row.diff_norm <= 0.0) continue;
      const double bound =
          std::pow(7.0 / 8.0, row.iter - 1) * first_diff * (1.0 + 1e-9);
      CHECK(row.diff_norm <= bound);
    }
  }
}

TEST_CASE("precondition violations carry named codes") {
  ScalarSpace sp;
  auto B = [](double x, double y) { return x * y; };

  SUBCASE("eps too large") {
    try {
      solve_picard(sp, 0.3, B, 0.0, 1.0, 0.3);  // eps > 1/(4 C_B)
      FAIL("expected PicardError");
    } catch (const PicardError& e) {
      CHECK(e.code == "eps_too_large");
    }
  }
  SUBCASE("datum above eps") {
    try {
      solve_picard(sp, 0.2, B, 0.0, 1.0, 0.1);
      FAIL("expected PicardError");
    } catch (const PicardError& e) {
      CHECK(e.code == "eps_too_large");
    }
  }
  SUBCASE("C_B below one") {
    try {
      solve_picard(sp, 0.1, B, 0.0, 0.5, 0.1);
      FAIL("expected PicardError");
    } catch (const PicardError& e) {
      CHECK(e.code == "cb_below_one");
    }
  }
  SUBCASE("linear bound violated") {
    try {
      solve_picard(sp, 0.2, B, 0.5, 1.0, 0.2);  // 2|U| = 1 >> 1/8
      FAIL("expected PicardError");
    } catch (const PicardError& e) {
      CHECK(e.code == "linear_bound_violated");
    }
  }
}

TEST_CASE("boundary case: linear bound holding with equality is accepted") {
  ScalarSpace sp;
  auto B = [](double x, double y) { return x * y; };
  // |B(x,U)| + |B(U,x)| = 2 * (1/16) |x| = |x|/8 exactly.
  CHECK_NOTHROW(solve_picard(sp, 0.1, B, 1.0 / 16.0, 1.0, 0.15));
}

TEST_CASE("R^8 instances contract, stay in the ball, and are unique") {
  for (std::uint64_t seed : {101ULL, 202ULL, 303ULL, 404ULL, 505ULL}) {
    R8Instance inst(seed);
    auto B = inst.bilinear();
    auto [e, trace] = solve_picard(inst.sp, inst.e0, B, inst.U, 1.0, 0.2);
    CHECK(trace.converged);
    CHECK(trace.max_ratio() <= 7.0 / 8.0 + 1e-9);
    CHECK(trace.max_norm() <= 0.3 + 1e-12);
    CHECK(trace.residual <= 1e-12);

    const auto uniq = uniqueness_probe(inst.sp, inst.e0, B, inst.U, 1.0, 0.2, 5);
    CHECK(uniq.all_converged);
    CHECK(uniq.max_pairwise <= 1e-10);
    // radius = min(3 eps/2, 7/(16 C_B)) = min(0.3, 0.4375) = 0.3.
    CHECK(uniq.radius == doctest::Approx(0.3));
    CHECK(uniq.active_bound == "3eps/2");
  }
}

TEST_CASE("uniqueness probe from zero datum returns zero from every start") {
  ScalarSpace sp;
  auto B = [](double x, double y) { return x * y; };
  const auto uniq = uniqueness_probe(sp, 0.0, B, 1.0 / 16.0, 1.0, 0.05, 5);
  CHECK(uniq.all_converged);
  for (const auto& t : uniq.trials) CHECK(t.limit_distance <= 1e-12);
}

TEST_CASE("bilinearity and bound probes") {
  R8Instance inst(606);
  auto B = inst.bilinear();
  CHECK(bilinearity_defect(inst.sp, B, 32, 7) <= 1e-10);
  CHECK(bilinear_bound_quotient(inst.sp, B, 32, 7) <= 1.0 + 1e-12);
  CHECK(linear_bound_quotient(inst.sp, B, inst.U, 32, 7) <= 0.125 * (1.0 + 1e-9));
}

TEST_CASE("norm contract probes on the Euclidean space") {
  EuclideanSpace sp{8};
  std::mt19937_64 rng(8);
  CHECK(sp.norm(sp.zero()) == 0.0);
  for (int i = 0; i < 32; ++i) {
    const auto x = sp.random_unit(rng);
    const auto y = sp.random_unit(rng);
    CHECK(sp.norm(sp.add(x, y)) <= sp.norm(x) + sp.norm(y) + 1e-12);
    const double c = -2.0 + 4.0 * (i / 32.0);
    CHECK(sp.norm(sp.scale(c, x)) == doctest::Approx(std::abs(c) * sp.norm(x)));
  }
}
