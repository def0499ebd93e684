#include "pns/landau.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "pns/lorentz.hpp"
#include "pns/profiles.hpp"
#include "pns/spectral.hpp"

namespace pns::landau {

namespace {

void check_params(const LandauParams& p) {
  if (!(p.a > 1.0)) throw std::invalid_argument("LandauParams: a must be > 1");
  const double an = std::sqrt(p.axis[0] * p.axis[0] + p.axis[1] * p.axis[1] +
                              p.axis[2] * p.axis[2]);
  if (std::abs(an - 1.0) > 1e-12)
    throw std::invalid_argument("LandauParams: axis must be a unit vector");
}

/// rho * u(x): depends only on the direction x/rho. Finite for all x != 0.
Vec3 direction_profile(const Vec3& xhat, const LandauParams& p, FormulaVariant variant) {
  const double ct = xhat[0] * p.axis[0] + xhat[1] * p.axis[1] + xhat[2] * p.axis[2];
  const double a = p.a;
  const double radial = 2.0 * ((a * a - 1.0) / ((a - ct) * (a - ct)) - 1.0);
  // u_th th_hat = -2 (cos th rho_hat - axis) / (a - cos th); the sin th in
  // u_th cancels against the one in th_hat, so the on-axis limit is exact.
  double polar = -2.0 / (a - ct);
  if (variant == FormulaVariant::sign_flipped) polar = -polar;
  Vec3 v;
  for (int i = 0; i < 3; ++i)
    v[i] = radial * xhat[i] + polar * (ct * xhat[i] - p.axis[i]);
  return v;
}

/// Cubic radial cap: q(rho) = (2 - 2 s^2 + s^3)/r_cut with s = rho/r_cut.
double cap_profile(double rho, double r_cut) {
  const double s = rho / r_cut;
  return (2.0 - 2.0 * s * s + s * s * s) / r_cut;
}

}  // namespace

Vec3 landau_velocity(const Vec3& x, const LandauParams& params, FormulaVariant variant) {
  check_params(params);
  const double rho = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  if (rho == 0.0)
    throw std::domain_error("landau_velocity: singular at the origin");
  const Vec3 xhat = {x[0] / rho, x[1] / rho, x[2] / rho};
  Vec3 v = direction_profile(xhat, params, variant);
  for (auto& c : v) c /= rho;
  return v;
}

Vec3 mollified_velocity(const Vec3& x, const LandauParams& params, double r_cut,
                        FormulaVariant variant) {
  check_params(params);
  if (!(r_cut > 0.0)) throw std::invalid_argument("mollified_velocity: r_cut must be > 0");
  const double rho = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  if (rho >= r_cut) return landau_velocity(x, params, variant);
  const Vec3 xhat = (rho == 0.0) ? params.axis : Vec3{x[0] / rho, x[1] / rho, x[2] / rho};
  Vec3 v = direction_profile(xhat, params, variant);
  const double q = cap_profile(rho, r_cut);
  for (auto& c : v) c *= q;
  return v;
}

MollifiedBackground landau_background(const Grid& grid, const LandauParams& params,
                                      double r_cut, FormulaVariant variant) {
  check_params(params);
  if (!(r_cut >= 2.0 * grid.spacing))
    throw std::invalid_argument("landau_background: r_cut must be >= 2 * spacing (got " +
                                std::to_string(r_cut) + " with spacing " +
                                std::to_string(grid.spacing) + ")");

  const VectorField3 raw = sample_field(grid, [&](double x, double y, double z) {
    return mollified_velocity({x, y, z}, params, r_cut, variant);
  });

  auto hat = spectral::forward(raw);
  spectral::leray_project(hat);
  MollifiedBackground bg;
  bg.params = params;
  bg.r_cut = r_cut;
  bg.field = spectral::inverse(hat);
  bg.max_divergence = spectral::max_divergence(hat);
  bg.weak_l3_norm = lorentz::lorentz_quasinorm(bg.field, lorentz::LorentzIndex::weak(3.0));

  // Relative projection correction outside 2 r_cut.
  long double num = 0.0L, den = 0.0L;
  const int n = grid.n;
  for (int ix = 0; ix < n; ++ix) {
    const double x = grid.coord(ix);
    for (int iy = 0; iy < n; ++iy) {
      const double y = grid.coord(iy);
      for (int iz = 0; iz < n; ++iz) {
        const double z = grid.coord(iz);
        if (x * x + y * y + z * z < 4.0 * r_cut * r_cut) continue;
        const std::size_t i = grid.index(ix, iy, iz);
        for (int c = 0; c < 3; ++c) {
          const double d = bg.field.comp[c][i] - raw.comp[c][i];
          num += d * d;
          den += raw.comp[c][i] * raw.comp[c][i];
        }
      }
    }
  }
  bg.projection_correction = den > 0.0L ? std::sqrt(static_cast<double>(num / den)) : 0.0;
  return bg;
}

std::string ResidualReport::to_csv() const {
  std::ostringstream os;
  os << "a,n,r_in,r_out,residual,order_estimate\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", r.a, r.n, r.r_in,
                  r.r_out, r.residual, r.order_estimate);
    os << buf;
  }
  return os.str();
}

ResidualReport residual_report(const LandauParams& params, double r_in, double r_out,
                               const std::vector<int>& levels, double box_len,
                               double r_cut, FormulaVariant variant) {
  check_params(params);
  if (!(0.0 < r_in && r_in < r_out && r_out < 0.5 * box_len))
    throw std::invalid_argument("residual_report: need 0 < r_in < r_out < L/2");

  const double taper_lo = r_out + 0.30 * (0.5 * box_len - r_out);
  const double taper_hi = r_out + 0.85 * (0.5 * box_len - r_out);

  ResidualReport report;
  double prev_residual = std::numeric_limits<double>::quiet_NaN();
  for (int n : levels) {
    const Grid g = build_grid(n, box_len);
    if (!(r_cut >= 2.0 * g.spacing))
      throw std::invalid_argument("residual_report: r_cut under-resolved at n = " +
                                  std::to_string(n));
    const VectorField3 W = sample_field(g, [&](double x, double y, double z) {
      const double rho = std::sqrt(x * x + y * y + z * z);
      Vec3 v = mollified_velocity({x, y, z}, params, r_cut, variant);
      const double w = profiles::radial_taper(rho, taper_lo, taper_hi);
      return Vec3{v[0] * w, v[1] * w, v[2] * w};
    });

    const auto What = spectral::forward(W);
    // G = -Lap W + W.grad W, spectrally.
    auto lap = What;
    {
      const int nn = g.n;
      const double k0 = 2.0 * std::numbers::pi / g.box_len;
      const int nzh = nn / 2 + 1;
      for (int ix = 0; ix < nn; ++ix) {
        const double kx = k0 * spectral::signed_freq(ix, nn);
        for (int iy = 0; iy < nn; ++iy) {
          const double ky = k0 * spectral::signed_freq(iy, nn);
          std::size_t idx = (static_cast<std::size_t>(ix) * nn + iy) * nzh;
          for (int iz = 0; iz < nzh; ++iz, ++idx) {
            const double k2 = kx * kx + ky * ky + (k0 * iz) * (k0 * iz);
            for (int c = 0; c < 3; ++c) lap.comp[c][idx] *= -k2;
          }
        }
      }
    }
    const auto adv = spectral::advection_divergence_spectral(W, W);
    auto G = spectral::sub(adv, lap);  // -Lap W + W.grad W

    // curl via spectral multiplier ik x .
    auto curl_of = [&](const spectral::SpectralVectorField3& F) {
      spectral::SpectralVectorField3 C(g);
      const int nn = g.n;
      const double k0 = 2.0 * std::numbers::pi / g.box_len;
      const int nzh = nn / 2 + 1;
      for (int ix = 0; ix < nn; ++ix) {
        const int mx = spectral::signed_freq(ix, nn);
        const double kx = (std::abs(mx) == nn / 2) ? 0.0 : k0 * mx;
        for (int iy = 0; iy < nn; ++iy) {
          const int my = spectral::signed_freq(iy, nn);
          const double ky = (std::abs(my) == nn / 2) ? 0.0 : k0 * my;
          std::size_t idx = (static_cast<std::size_t>(ix) * nn + iy) * nzh;
          for (int iz = 0; iz < nzh; ++iz, ++idx) {
            const double kz = (iz == nn / 2) ? 0.0 : k0 * iz;
            const spectral::Complex i(0.0, 1.0);
            C.comp[0][idx] = i * (ky * F.comp[2][idx] - kz * F.comp[1][idx]);
            C.comp[1][idx] = i * (kz * F.comp[0][idx] - kx * F.comp[2][idx]);
            C.comp[2][idx] = i * (kx * F.comp[1][idx] - ky * F.comp[0][idx]);
          }
        }
      }
      return C;
    };

    const VectorField3 curlG = spectral::inverse(curl_of(G));
    const VectorField3 curlLap = spectral::inverse(curl_of(lap));
    auto Gproj = G;
    spectral::leray_project(Gproj);
    const VectorField3 Gp = spectral::inverse(Gproj);
    const VectorField3 lapW = spectral::inverse(lap);

    long double num = 0.0L, den = 0.0L, pnum = 0.0L, pden = 0.0L;
    for (int ix = 0; ix < n; ++ix) {
      const double x = g.coord(ix);
      for (int iy = 0; iy < n; ++iy) {
        const double y = g.coord(iy);
        for (int iz = 0; iz < n; ++iz) {
          const double z = g.coord(iz);
          const double rho2 = x * x + y * y + z * z;
          if (rho2 < r_in * r_in || rho2 > r_out * r_out) continue;
          const std::size_t i = g.index(ix, iy, iz);
          for (int c = 0; c < 3; ++c) {
            num += curlG.comp[c][i] * curlG.comp[c][i];
            den += curlLap.comp[c][i] * curlLap.comp[c][i];
            pnum += Gp.comp[c][i] * Gp.comp[c][i];
            pden += lapW.comp[c][i] * lapW.comp[c][i];
          }
        }
      }
    }
    ResidualRow row;
    row.a = params.a;
    row.n = n;
    row.r_in = r_in;
    row.r_out = r_out;
    row.residual = std::sqrt(static_cast<double>(num / den));
    row.projected_residual = std::sqrt(static_cast<double>(pnum / pden));
    row.order_estimate = std::isnan(prev_residual)
                             ? std::numeric_limits<double>::quiet_NaN()
                             : std::log2(prev_residual / row.residual);
    prev_residual = row.residual;
    report.rows.push_back(row);
  }
  return report;
}

DivergenceProbe divergence_probe(const LandauParams& params, double r_in, double r_out,
                                 double h_fd, int points, std::uint64_t seed,
                                 FormulaVariant variant) {
  check_params(params);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  DivergenceProbe probe;
  probe.points = points;
  long double rms = 0.0L;
  for (int s = 0; s < points; ++s) {
    // Uniform direction, radius uniform in [r_in, r_out].
    double dx, dy, dz, nrm2;
    do {
      dx = 2.0 * unif(rng) - 1.0;
      dy = 2.0 * unif(rng) - 1.0;
      dz = 2.0 * unif(rng) - 1.0;
      nrm2 = dx * dx + dy * dy + dz * dz;
    } while (nrm2 > 1.0 || nrm2 < 1e-6);
    const double rho = r_in + (r_out - r_in) * unif(rng);
    const double sc = rho / std::sqrt(nrm2);
    const Vec3 x = {dx * sc, dy * sc, dz * sc};

    double div = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 xp = x, xm = x;
      xp[axis] += h_fd;
      xm[axis] -= h_fd;
      div += (landau_velocity(xp, params, variant)[axis] -
              landau_velocity(xm, params, variant)[axis]) /
             (2.0 * h_fd);
    }
    const Vec3 u = landau_velocity(x, params, variant);
    const double mag = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    probe.max_scaled = std::max(probe.max_scaled, std::abs(div) * h_fd / mag);
    rms += div * div;
  }
  probe.rms_div = std::sqrt(static_cast<double>(rms / points));
  return probe;
}

}  // namespace pns::landau
