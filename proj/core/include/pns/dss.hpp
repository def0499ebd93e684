#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pns/grid.hpp"
#include "pns/mild_solver.hpp"

namespace pns::dss {

/// lambda-discretely-self-similar datum built from a compactly supported
/// divergence-free profile on the annulus {1 <= |x| <= lambda}, extended by
/// u0(x) = lambda^{-k} u_tilde(lambda^{-k} x) on the shells k_min..k_max.
struct DssParams {
  double lambda = 2.0;
  double amplitude = 1.0;  // M = ||u_tilde||_{L^3} of the profile
  int k_min = 0;
  int k_max = 3;
  /// Optional custom annulus profile; must be divergence free (checked by a
  /// finite-difference probe before extension). Default: curl of a radial
  /// bump potential, divergence free by construction.
  std::function<Vec3(const Vec3&)> profile;
};

/// Pointwise analytic value of the truncated DSS extension. Exactly satisfies
/// lambda u0(lambda x) = u0(x) wherever both shells are realized.
Vec3 dss_extension_value(const Vec3& x, const DssParams& params);

struct DssField {
  DssParams params;
  VectorField3 field;
  double weak_l3_norm = 0.0;        // measured ||u0||_{L^{3,inf}} on the grid
  double profile_l3 = 0.0;          // M actually realized by the profile
  double equivalence_lower = 0.0;   // M / (3(l-1)^2)^{1/3} <= ||u0||_{3,inf}
  double equivalence_upper = 0.0;   // <= (l^3/(3(l-1)))^{1/3} M
  double spectral_divergence = 0.0; // max_k |k.u_hat| / max_k |u_hat|
};

/// Samples the extension on the grid. Requires at least 3 shells resolved:
/// lambda^{k_min} >= 4 h and lambda^{k_max+1} <= L/2.
DssField make_dss_data(const Grid& grid, const DssParams& params);

struct AnnulusInequality {
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
  bool holds = false;
};

/// Both shell-to-norm inequalities with their explicit constants:
///   int_{1<=|x|<=l} |u0|^3 <= 3(l-1)^2 ||u0||^3_{3,inf}
///   ||u0||^3_{3,inf} <= l^3/(3(l-1)) int_{1<=|x|<=l} |u0|^3.
struct AnnulusReport {
  double lambda = 0.0;
  double cube_integral = 0.0;  // int over the fundamental annulus of |u0|^3
  double weak3 = 0.0;
  AnnulusInequality first;
  AnnulusInequality second;
  bool both_hold() const { return first.holds && second.holds; }
  std::string to_json() const;  // array of {lambda, lhs, rhs, constant, holds}
};

AnnulusReport annulus_inequalities(const DssField& u0, double lambda);
AnnulusReport annulus_inequalities(const VectorField3& u0, double lambda);

/// r_k = ||u(lambda^{2k} t0)||_{3,inf} / ||u(t0)||_{3,inf} read off the
/// trajectory's norm rows; identically 1 for an exact DSS evolution.
struct RescaledSeries {
  struct Row {
    int k = 0;
    double t = 0.0;
    double ratio = 0.0;
  };
  std::vector<Row> rows;
  bool zero_norm = false;
  std::string to_csv() const;  // k,t,ratio
};

RescaledSeries rescaled_norm_series(const solver::SolutionTrajectory& traj,
                                    double lambda, double t0);

}  // namespace pns::dss
