#include "pns/dss.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pns/lorentz.hpp"
#include "pns/profiles.hpp"
#include "pns/spectral.hpp"

#include "json.hpp"

namespace pns::dss {

namespace {

// Fixed direction for the default curl potential, away from the grid axes.
constexpr Vec3 kPotentialDir = {0.48, 0.60, 0.64};  // unit

double bump(double rho, double lambda) {
  const double s = (2.0 * rho - 1.0 - lambda) / (lambda - 1.0);
  if (s <= -1.0 || s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double bump_deriv(double rho, double lambda) {
  const double s = (2.0 * rho - 1.0 - lambda) / (lambda - 1.0);
  if (s <= -1.0 || s >= 1.0) return 0.0;
  const double om = 1.0 - s * s;
  return bump(rho, lambda) * (-2.0 * s / (om * om)) * (2.0 / (lambda - 1.0));
}

/// Default profile: curl(phi(rho) c) = phi'(rho) (x_hat x c). Supported in
/// the open annulus, divergence free identically.
Vec3 default_profile(const Vec3& x, double lambda, double scale) {
  const double rho = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  if (rho <= 1.0 || rho >= lambda) return {0.0, 0.0, 0.0};
  const double dphi = bump_deriv(rho, lambda) * scale;
  const Vec3 xh = {x[0] / rho, x[1] / rho, x[2] / rho};
  return {dphi * (xh[1] * kPotentialDir[2] - xh[2] * kPotentialDir[1]),
          dphi * (xh[2] * kPotentialDir[0] - xh[0] * kPotentialDir[2]),
          dphi * (xh[0] * kPotentialDir[1] - xh[1] * kPotentialDir[0])};
}

/// ||curl(phi c)||_{L^3}^3 = [int |phi'|^3 rho^2 drho] [int_{S^2} sin^3 psi]
/// with the angular factor 3 pi^2 / 4; Simpson quadrature on the radial part.
double default_profile_l3(double lambda) {
  const int m = 4000;
  const double a = 1.0, b = lambda;
  const double h = (b - a) / m;
  long double acc = 0.0L;
  for (int i = 0; i <= m; ++i) {
    const double rho = a + i * h;
    const double f = std::pow(std::abs(bump_deriv(rho, lambda)), 3.0) * rho * rho;
    const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * f;
  }
  const double radial = static_cast<double>(acc) * h / 3.0;
  const double angular = 3.0 * std::numbers::pi * std::numbers::pi / 4.0;
  return std::cbrt(radial * angular);
}

void check_params(const DssParams& p) {
  if (!(p.lambda > 1.0)) throw std::invalid_argument("DssParams: lambda must be > 1");
  if (!(p.amplitude > 0.0)) throw std::invalid_argument("DssParams: amplitude must be > 0");
  if (p.k_max < p.k_min) throw std::invalid_argument("DssParams: empty shell range");
}

double profile_scale(const DssParams& p) {
  return p.amplitude / default_profile_l3(p.lambda);
}

}  // namespace

Vec3 dss_extension_value(const Vec3& x, const DssParams& params) {
  check_params(params);
  const double rho = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  if (rho <= 0.0) return {0.0, 0.0, 0.0};
  const double ll = std::log(params.lambda);
  int k = static_cast<int>(std::floor(std::log(rho) / ll + 1e-12));
  if (k < params.k_min || k > params.k_max) return {0.0, 0.0, 0.0};
  const double s = std::pow(params.lambda, static_cast<double>(-k));

  if (params.profile) {
    const Vec3 y = {s * x[0], s * x[1], s * x[2]};
    const Vec3 v = params.profile(y);
    return {s * v[0], s * v[1], s * v[2]};
  }
  const double amp = profile_scale(params);
  const Vec3 y = {s * x[0], s * x[1], s * x[2]};
  const Vec3 v = default_profile(y, params.lambda, amp);
  return {s * v[0], s * v[1], s * v[2]};
}

DssField make_dss_data(const Grid& grid, const DssParams& params) {
  check_params(params);
  const double lo = std::pow(params.lambda, static_cast<double>(params.k_min));
  const double hi = std::pow(params.lambda, static_cast<double>(params.k_max + 1));
  if (params.k_max - params.k_min + 1 < 3 || lo < 4.0 * grid.spacing ||
      hi > 0.5 * grid.box_len)
    throw std::invalid_argument(
        "make_dss_data: insufficient shell resolution (need >= 3 shells with "
        "lambda^k_min >= 4h and lambda^(k_max+1) <= L/2)");

  if (params.profile) {
    // User profile: probe divergence by central differences before extending.
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double h_fd = 1e-5 * (params.lambda - 1.0);
    for (int i = 0; i < 64; ++i) {
      double dx, dy, dz, n2;
      do {
        dx = 2.0 * unif(rng) - 1.0;
        dy = 2.0 * unif(rng) - 1.0;
        dz = 2.0 * unif(rng) - 1.0;
        n2 = dx * dx + dy * dy + dz * dz;
      } while (n2 > 1.0 || n2 < 1e-6);
      const double rho = 1.0 + (params.lambda - 1.0) * unif(rng);
      const double sc = rho / std::sqrt(n2);
      const Vec3 x = {dx * sc, dy * sc, dz * sc};
      double div = 0.0, mag = 0.0;
      for (int axis = 0; axis < 3; ++axis) {
        Vec3 xp = x, xm = x;
        xp[axis] += h_fd;
        xm[axis] -= h_fd;
        div += (params.profile(xp)[axis] - params.profile(xm)[axis]) / (2.0 * h_fd);
        mag = std::max(mag, std::abs(params.profile(x)[axis]));
      }
      if (std::abs(div) > 1e-4 * std::max(1.0, mag / (params.lambda - 1.0)))
        throw std::invalid_argument("make_dss_data: user profile fails divergence check");
    }
  }

  DssField out;
  out.params = params;
  out.field = sample_field(grid, [&](double x, double y, double z) {
    return dss_extension_value({x, y, z}, params);
  });
  out.profile_l3 = params.amplitude;
  out.weak_l3_norm =
      lorentz::lorentz_quasinorm(out.field, lorentz::LorentzIndex::weak(3.0));
  const double l = params.lambda;
  out.equivalence_lower = params.amplitude / std::cbrt(3.0 * (l - 1.0) * (l - 1.0));
  out.equivalence_upper = std::cbrt(l * l * l / (3.0 * (l - 1.0))) * params.amplitude;

  const auto hat = spectral::forward(out.field);
  const double mode_scale = spectral::max_mode_norm(hat);
  out.spectral_divergence =
      mode_scale > 0.0 ? spectral::max_divergence(hat) / mode_scale : 0.0;
  return out;
}

std::string AnnulusReport::to_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const AnnulusInequality* ineq : {&first, &second}) {
    nlohmann::ordered_json j;
    j["lambda"] = lambda;
    j["lhs"] = ineq->lhs;
    j["rhs"] = ineq->rhs;
    j["constant"] = ineq->constant;
    j["holds"] = ineq->holds;
    arr.push_back(j);
  }
  return arr.dump();
}

AnnulusReport annulus_inequalities(const VectorField3& u0, double lambda) {
  if (!(lambda > 1.0)) throw std::invalid_argument("annulus_inequalities: lambda > 1");
  AnnulusReport rep;
  rep.lambda = lambda;

  const Grid& g = u0.grid;
  long double cube = 0.0L;
  for (int ix = 0; ix < g.n; ++ix) {
    const double x = g.coord(ix);
    for (int iy = 0; iy < g.n; ++iy) {
      const double y = g.coord(iy);
      for (int iz = 0; iz < g.n; ++iz) {
        const double z = g.coord(iz);
        const double r2 = x * x + y * y + z * z;
        if (r2 < 1.0 || r2 >= lambda * lambda) continue;
        const std::size_t i = g.index(ix, iy, iz);
        const double m2 = u0.comp[0][i] * u0.comp[0][i] + u0.comp[1][i] * u0.comp[1][i] +
                          u0.comp[2][i] * u0.comp[2][i];
        cube += m2 * std::sqrt(m2);
      }
    }
  }
  rep.cube_integral = static_cast<double>(cube) * g.cell_measure;
  rep.weak3 = lorentz::lorentz_quasinorm(u0, lorentz::LorentzIndex::weak(3.0));
  const double w3 = rep.weak3 * rep.weak3 * rep.weak3;

  rep.first.constant = 3.0 * (lambda - 1.0) * (lambda - 1.0);
  rep.first.lhs = rep.cube_integral;
  rep.first.rhs = rep.first.constant * w3;
  rep.first.holds = rep.first.lhs <= rep.first.rhs * (1.0 + 1e-12);

  rep.second.constant = lambda * lambda * lambda / (3.0 * (lambda - 1.0));
  rep.second.lhs = w3;
  rep.second.rhs = rep.second.constant * rep.cube_integral;
  rep.second.holds = rep.second.lhs <= rep.second.rhs * (1.0 + 1e-12);
  return rep;
}

AnnulusReport annulus_inequalities(const DssField& u0, double lambda) {
  return annulus_inequalities(u0.field, lambda);
}

std::string RescaledSeries::to_csv() const {
  std::ostringstream os;
  os << "k,t,ratio\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.k, r.t, r.ratio);
    os << buf;
  }
  return os.str();
}

RescaledSeries rescaled_norm_series(const solver::SolutionTrajectory& traj,
                                    double lambda, double t0) {
  if (!(lambda > 1.0)) throw std::invalid_argument("rescaled_norm_series: lambda > 1");
  if (traj.norms.empty()) throw std::invalid_argument("rescaled_norm_series: empty trajectory");
  const double t_last = traj.norms.back().t;
  if (!(lambda * lambda * t0 <= t_last * (1.0 + 1e-9)))
    throw std::invalid_argument(
        "rescaled_norm_series: horizon too short (needs at least one lambda^2 cycle)");

  const auto weak_at = [&](double t) -> double {
    double best = -1.0, best_dt = 1e300;
    for (const auto& row : traj.norms) {
      const double d = std::abs(row.t - t);
      if (d < best_dt) {
        best_dt = d;
        best = row.l3winf;
      }
    }
    const double dt = traj.config.dt;
    if (best_dt > 0.5 * dt * std::max(1, traj.config.norm_stride) + 1e-12)
      throw std::invalid_argument("rescaled_norm_series: no norm sample near t = " +
                                  std::to_string(t));
    return best;
  };

  RescaledSeries series;
  const double base = weak_at(t0);
  if (base <= 0.0) {
    series.zero_norm = true;
    return series;
  }
  double t = t0;
  int k = 0;
  while (t <= t_last * (1.0 + 1e-9)) {
    series.rows.push_back({k, t, weak_at(t) / base});
    ++k;
    t = t0 * std::pow(lambda, 2.0 * k);
  }
  return series;
}

}  // namespace pns::dss
