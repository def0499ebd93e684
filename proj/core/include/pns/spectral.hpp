#pragma once

#include <array>
#include <complex>
#include <vector>

#include "pns/grid.hpp"

namespace pns::spectral {

using Complex = std::complex<double>;

/// Fourier coefficients of a real vector field in r2c half-spectrum layout:
/// dimensions n x n x (n/2+1), z-fastest. Coefficient convention carries the
/// 1/n^3 on the forward transform, so f(x_j) = sum_m u_hat(m) e^{i k_m . x'_j}
/// with k = (2 pi / L) m and inverse(forward(f)) == f.
struct SpectralVectorField3 {
  Grid grid;
  std::array<std::vector<Complex>, 3> comp;

  SpectralVectorField3() = default;
  explicit SpectralVectorField3(const Grid& g);
};

std::size_t spectral_size(const Grid& g);

/// Signed integer frequency for index i on an axis of n points.
inline int signed_freq(int i, int n) { return (i <= n / 2) ? i : i - n; }

std::vector<Complex> forward_scalar(const ScalarField& f);
ScalarField inverse_scalar(const Grid& g, const std::vector<Complex>& fh);

SpectralVectorField3 forward(const VectorField3& u);
VectorField3 inverse(const SpectralVectorField3& uh);

/// Leray projection I - k k^T/|k|^2 per mode; the zero mode is left
/// unchanged. Idempotent; annihilates gradients.
void leray_project(SpectralVectorField3& u);

/// Heat semigroup e^{t Delta}: multiplier e^{-|k|^2 t}, t >= 0.
void heat_propagate(SpectralVectorField3& u, double t);
SpectralVectorField3 heat_propagated(const SpectralVectorField3& u, double t);

/// D^alpha P e^{t Delta} with |alpha| <= 2 and t > 0: multiplier
/// (ik)^alpha (I - k k^T/|k|^2) e^{-|k|^2 t}. Odd derivatives are zeroed on
/// Nyquist planes to keep the result a real field.
SpectralVectorField3 oseen_apply(const SpectralVectorField3& u, double t,
                                 const std::array<int, 3>& alpha);

/// Zero all modes with any 3|m_i| > n (2/3 rule).
void dealias(SpectralVectorField3& u);

/// div(u (x) v)_i = d_j (u_j v_i): pseudo-spectral product, spectral
/// derivative, 2/3-rule dealiasing. The first argument transports. The Leray
/// projection is NOT applied here; callers compose it.
SpectralVectorField3 advection_divergence_spectral(const VectorField3& u,
                                                   const VectorField3& v);
VectorField3 advection_divergence(const VectorField3& u, const VectorField3& v);

/// max over modes of |k . u_hat(k)| (weak-form divergence residual).
double max_divergence(const SpectralVectorField3& u);
double max_mode_norm(const SpectralVectorField3& u);

/// Parseval-side norms: ||f||_{L^2} = sqrt(L^3 sum w |u_hat|^2) and
/// ||grad f||_{L^2} = sqrt(L^3 sum w |k|^2 |u_hat|^2).
double l2_norm(const SpectralVectorField3& u);
double h1dot_norm(const SpectralVectorField3& u);

SpectralVectorField3 add(const SpectralVectorField3& a, const SpectralVectorField3& b);
SpectralVectorField3 sub(const SpectralVectorField3& a, const SpectralVectorField3& b);
SpectralVectorField3 scaled(const SpectralVectorField3& a, double s);
void axpy(SpectralVectorField3& y, double a, const SpectralVectorField3& x);

/// Spec-level multiplier wrapper: heat(t), leray, derivative(alpha),
/// dealias_mask, all routed through the free functions above.
struct Multiplier {
  enum class Kind { heat, leray, derivative, dealias_mask };
  Kind kind = Kind::leray;
  double t = 0.0;
  std::array<int, 3> alpha{0, 0, 0};

  static Multiplier heat(double t) { return {Kind::heat, t, {0, 0, 0}}; }
  static Multiplier leray() { return {Kind::leray, 0.0, {0, 0, 0}}; }
  static Multiplier derivative(const std::array<int, 3>& a) {
    return {Kind::derivative, 0.0, a};
  }
  static Multiplier dealias_mask() { return {Kind::dealias_mask, 0.0, {0, 0, 0}}; }

  void apply(SpectralVectorField3& u) const;
};

}  // namespace pns::spectral
