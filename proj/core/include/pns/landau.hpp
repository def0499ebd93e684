#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pns/grid.hpp"

namespace pns::landau {

/// Axisymmetric (-1)-homogeneous jet parameters. Larger a gives a weaker jet.
struct LandauParams {
  double a = 2.0;
  Vec3 axis = {0.0, 0.0, 1.0};
};

/// Fault-injection hook used by the verification suite: sign_flipped negates
/// the polar component, which breaks both the divergence and the stationary
/// residual while preserving (-1)-homogeneity.
enum class FormulaVariant { exact, sign_flipped };

/// Closed-form jet velocity in Cartesian components, spherical form
///   u_rho = (2/rho)((a^2-1)/(a-cos th)^2 - 1),
///   u_th  = -2 sin th / (rho (a - cos th)).
/// Exactly (-1)-homogeneous; singular at the origin (throws there). The
/// formula is accepted only because residual_report verifies it solves the
/// stationary equations away from the origin.
Vec3 landau_velocity(const Vec3& x, const LandauParams& params,
                     FormulaVariant variant = FormulaVariant::exact);

/// Same field with the 1/rho radial factor replaced inside r_cut by the cubic
/// cap q(rho) with q(r_cut) = 1/r_cut, q'(r_cut) = -1/r_cut^2, q'(0) = 0.
/// Finite everywhere.
Vec3 mollified_velocity(const Vec3& x, const LandauParams& params, double r_cut,
                        FormulaVariant variant = FormulaVariant::exact);

struct MollifiedBackground {
  LandauParams params;
  double r_cut = 0.0;
  VectorField3 field;        // Leray re-projected, exactly discrete-divergence-free
  double weak_l3_norm = 0.0; // measured ||U||_{L^{3,inf}} of the projected field
  double max_divergence = 0.0;
  double projection_correction = 0.0; // rel. change outside 2 r_cut due to projection
};

/// Samples the mollified field on the grid and re-projects it divergence
/// free. Requires r_cut >= 2 * spacing.
MollifiedBackground landau_background(const Grid& grid, const LandauParams& params,
                                      double r_cut,
                                      FormulaVariant variant = FormulaVariant::exact);

struct ResidualRow {
  double a = 0.0;
  int n = 0;
  double r_in = 0.0;
  double r_out = 0.0;
  double residual = 0.0;        // curl-residual on the annulus, relative
  double order_estimate = 0.0;  // log2 decrease vs previous level (NaN on first)
  double projected_residual = 0.0;  // global Leray-projected residual (reported only)
};

struct ResidualReport {
  std::vector<ResidualRow> rows;
  std::string to_csv() const;  // a,n,r_in,r_out,residual,order_estimate
};

/// Stationary-equation oracle. Per refinement level n the mollified field is
/// tapered to zero near the box boundary (so it is smooth and periodic),
/// differentiated spectrally, and the residual of -Lap U + U.grad U measured
/// on the annulus after eliminating gradients. Gradients are eliminated with
/// the curl, which is local: the Landau point force at the origin is a
/// gradient away from its support, so a global Leray projection would retain
/// its O(|x|^-3) tail while the curl annihilates it. The projected residual
/// is still computed and reported alongside.
ResidualReport residual_report(const LandauParams& params, double r_in, double r_out,
                               const std::vector<int>& levels, double box_len,
                               double r_cut,
                               FormulaVariant variant = FormulaVariant::exact);

struct DivergenceProbe {
  double max_scaled = 0.0;  // max over points of |div_h u| * h / |u|
  double rms_div = 0.0;
  int points = 0;
};

/// Central-difference divergence of the closed form at random points in the
/// annulus. The formula's divergence vanishes identically, so div_h -> 0 at
/// second order in the step.
DivergenceProbe divergence_probe(const LandauParams& params, double r_in, double r_out,
                                 double h_fd, int points, std::uint64_t seed,
                                 FormulaVariant variant = FormulaVariant::exact);

}  // namespace pns::landau
