#pragma once

#include <cmath>

namespace pns::profiles {

// All-orders-smooth transition from 1 at s<=0 to 0 at s>=1.
inline double smooth_step_down(double s) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / (1.0 - s));
  const double b = std::exp(-1.0 / s);
  return a / (a + b);
}

/// 1 for rho <= r1, 0 for rho >= r2, smooth in between.
inline double radial_taper(double rho, double r1, double r2) {
  return smooth_step_down((rho - r1) / (r2 - r1));
}

/// C-infinity bump supported on the open interval (lo, hi), peak ~1.
inline double interval_bump(double x, double lo, double hi) {
  if (x <= lo || x >= hi) return 0.0;
  const double s = (2.0 * x - lo - hi) / (hi - lo);  // in (-1, 1)
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

/// (|x|^2 + eps^2)^{-gamma/2}: smooth realization of the homogeneous profile
/// |x|^{-gamma} with the singularity capped at scale eps.
inline double capped_power(double rho, double gamma, double eps) {
  return std::pow(rho * rho + eps * eps, -0.5 * gamma);
}

inline double gaussian(double rho, double sigma) {
  return std::exp(-0.5 * rho * rho / (sigma * sigma));
}

}  // namespace pns::profiles
