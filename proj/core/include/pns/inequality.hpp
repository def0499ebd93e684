#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pns/grid.hpp"
#include "pns/lorentz.hpp"

namespace pns::inequality {

/// One measured ratio. fitted_slope is the per-sample least-squares slope of
/// log norm against log t (NaN for kinds without a time fit).
struct RatioRow {
  std::string kind;
  int sample_id = 0;
  double t = 0.0;
  double ratio = 0.0;
  double fitted_slope = 0.0;
};

struct RatioTable {
  std::vector<RatioRow> rows;
  double predicted_slope = 0.0;

  double max_ratio() const;
  double mean_fitted_slope() const;
  std::string to_csv() const;  // kind,sample_id,t,ratio,fitted_slope
};

/// Heat estimate ratios: ||e^{tD}f||_{p1,q} t^{(3/2)(1/p2-1/p1)} / ||f||_{p2,q}.
/// Data: for p1 == p2 wide Gaussians; otherwise capped |x|^{-3/p2} profiles,
/// which realize the estimate's t-scaling exactly away from the cap scale.
/// Throws before any computation if p2 > p1 or exponents are out of range.
RatioTable heat_report(const Grid& g, double p1, double p2,
                       const lorentz::LorentzIndex& q_index, int samples,
                       const std::vector<double>& t_grid, std::uint64_t seed);

/// O'Neil convolution ratios ||f*g||_{r,s} / (||f||_{p1,q1} ||g||_{p2,q2})
/// over random Gaussian pairs. Requires 1/r + 1 = 1/p1 + 1/p2 and
/// 1/s <= 1/q1 + 1/q2.
struct OneilParams {
  lorentz::LorentzIndex f_idx;   // (p1, q1)
  lorentz::LorentzIndex g_idx;   // (p2, q2)
  lorentz::LorentzIndex out_idx; // (r, s)
};

RatioTable oneil_report(const Grid& g, const OneilParams& params, int samples,
                        std::uint64_t seed);

/// Oseen smoothing ratios ||D^a P e^{tD} f||_{L^p} t^{|a|/2 + (3/2)(1/3 - 1/p)}
/// / ||f||_{3,inf} on capped |x|^{-1} data. Requires 3 < p, |a| <= 2.
RatioTable oseen_report(const Grid& g, double p, const std::array<int, 3>& alpha,
                        int samples, const std::vector<double>& t_grid,
                        std::uint64_t seed);

/// Scalar heat flow, shared with the report machinery and tests.
ScalarField heat_scalar(const ScalarField& f, double t);

}  // namespace pns::inequality
