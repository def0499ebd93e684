#include "pns/inequality.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "pns/profiles.hpp"
#include "pns/spectral.hpp"

namespace pns::inequality {

namespace {

double fit_slope(const std::vector<double>& logt, const std::vector<double>& logn) {
  const std::size_t m = logt.size();
  double xm = 0, ym = 0;
  for (std::size_t i = 0; i < m; ++i) {
    xm += logt[i];
    ym += logn[i];
  }
  xm /= m;
  ym /= m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (logt[i] - xm) * (logt[i] - xm);
    sxy += (logt[i] - xm) * (logn[i] - ym);
  }
  return sxy / sxx;
}

void check_lorentz_range(const lorentz::LorentzIndex& idx, const char* what) {
  if (!(idx.p > 1.0) || (!idx.q_inf && !(idx.q > 1.0)))
    throw std::invalid_argument(std::string("inequality_report: invalid index for ") + what);
}

}  // namespace

double RatioTable::max_ratio() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.ratio);
  return m;
}

double RatioTable::mean_fitted_slope() const {
  double acc = 0.0;
  int cnt = 0;
  for (const auto& r : rows)
    if (std::isfinite(r.fitted_slope)) {
      acc += r.fitted_slope;
      ++cnt;
    }
  return cnt ? acc / cnt : std::numeric_limits<double>::quiet_NaN();
}

std::string RatioTable::to_csv() const {
  std::ostringstream os;
  os << "kind,sample_id,t,ratio,fitted_slope\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%.17g\n", r.kind.c_str(),
                  r.sample_id, r.t, r.ratio, r.fitted_slope);
    os << buf;
  }
  return os.str();
}

ScalarField heat_scalar(const ScalarField& f, double t) {
  if (t < 0.0) throw std::invalid_argument("heat_scalar: t must be >= 0");
  auto fh = spectral::forward_scalar(f);
  const int n = f.grid.n;
  const double k0 = 2.0 * std::numbers::pi / f.grid.box_len;
  const int nzh = n / 2 + 1;
  std::size_t idx = 0;
  for (int ix = 0; ix < n; ++ix) {
    const double kx = k0 * spectral::signed_freq(ix, n);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = k0 * spectral::signed_freq(iy, n);
      for (int iz = 0; iz < nzh; ++iz, ++idx) {
        const double kz = k0 * iz;
        fh[idx] *= std::exp(-(kx * kx + ky * ky + kz * kz) * t);
      }
    }
  }
  return spectral::inverse_scalar(f.grid, fh);
}

RatioTable heat_report(const Grid& g, double p1, double p2,
                       const lorentz::LorentzIndex& q_index, int samples,
                       const std::vector<double>& t_grid, std::uint64_t seed) {
  if (!(p1 > 1.0) || !(p2 > 1.0) || p2 > p1)
    throw std::invalid_argument("heat_report: need 1 < p2 <= p1");
  check_lorentz_range(q_index, "heat");
  if (t_grid.empty()) throw std::invalid_argument("heat_report: empty t grid");
  for (double t : t_grid)
    if (!(t > 0.0)) throw std::invalid_argument("heat_report: t values must be > 0");

  const double L = g.box_len;
  const double predicted = -1.5 * (1.0 / p2 - 1.0 / p1);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const lorentz::LorentzIndex idx1{p1, q_index.q, q_index.q_inf};
  const lorentz::LorentzIndex idx2{p2, q_index.q, q_index.q_inf};

  RatioTable table;
  table.predicted_slope = predicted;
  for (int s = 0; s < samples; ++s) {
    const double amp = 0.5 + unif(rng);
    ScalarField f(g);
    if (p1 == p2) {
      // Wide Gaussian: the norm barely moves over the sampled window.
      const double sigma = L * (0.14 + 0.03 * unif(rng));
      const Vec3 c = {L * 0.05 * (unif(rng) - 0.5), L * 0.05 * (unif(rng) - 0.5),
                      L * 0.05 * (unif(rng) - 0.5)};
      f = sample_scalar(g, [&](double x, double y, double z) {
        const double rho = std::sqrt((x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]) +
                                     (z - c[2]) * (z - c[2]));
        return amp * profiles::gaussian(rho, sigma);
      });
    } else {
      const double gamma = 3.0 / p2;
      const double eps = (2.0 + 0.4 * unif(rng)) * g.spacing;
      f = sample_scalar(
          g,
          [&](double x, double y, double z) {
            const double rho = std::sqrt(x * x + y * y + z * z);
            return amp * profiles::capped_power(rho, gamma, eps) *
                   profiles::radial_taper(rho, 0.38 * L, 0.48 * L);
          },
          {0.5 * g.spacing, 0.5 * g.spacing, 0.5 * g.spacing});
    }
    const double denom = lorentz::lorentz_quasinorm(f, idx2);

    std::vector<double> logt, logn;
    std::vector<RatioRow> pending;
    for (double t : t_grid) {
      const ScalarField ft = heat_scalar(f, t);
      const double nrm = lorentz::lorentz_quasinorm(ft, idx1);
      const double ratio = nrm * std::pow(t, -predicted) / denom;
      logt.push_back(std::log(t));
      logn.push_back(std::log(std::max(nrm, 1e-300)));
      pending.push_back(RatioRow{"heat", s, t, ratio, 0.0});
    }
    const double slope = fit_slope(logt, logn);
    for (auto& row : pending) {
      row.fitted_slope = slope;
      table.rows.push_back(row);
    }
  }
  return table;
}

RatioTable oneil_report(const Grid& g, const OneilParams& params, int samples,
                        std::uint64_t seed) {
  check_lorentz_range(params.f_idx, "oneil f");
  check_lorentz_range(params.g_idx, "oneil g");
  check_lorentz_range(params.out_idx, "oneil output");
  const double lhs = 1.0 / params.out_idx.p + 1.0;
  const double rhs = 1.0 / params.f_idx.p + 1.0 / params.g_idx.p;
  if (std::abs(lhs - rhs) > 1e-12)
    throw std::invalid_argument("oneil_report: Young relation 1/r + 1 = 1/p1 + 1/p2 violated");
  const double sinv = params.out_idx.q_inf ? 0.0 : 1.0 / params.out_idx.q;
  const double q1inv = params.f_idx.q_inf ? 0.0 : 1.0 / params.f_idx.q;
  const double q2inv = params.g_idx.q_inf ? 0.0 : 1.0 / params.g_idx.q;
  if (sinv > q1inv + q2inv + 1e-12)
    throw std::invalid_argument("oneil_report: need 1/s <= 1/q1 + 1/q2");

  const double L = g.box_len;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  RatioTable table;
  table.predicted_slope = std::numeric_limits<double>::quiet_NaN();
  for (int s = 0; s < samples; ++s) {
    auto random_gaussian = [&]() {
      const double sigma = L * (0.03 + 0.10 * unif(rng));
      const double amp = std::exp(2.0 * (unif(rng) - 0.5));
      const Vec3 c = {L * 0.4 * (unif(rng) - 0.5), L * 0.4 * (unif(rng) - 0.5),
                      L * 0.4 * (unif(rng) - 0.5)};
      return sample_scalar(g, [=](double x, double y, double z) {
        const double rho = std::sqrt((x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]) +
                                     (z - c[2]) * (z - c[2]));
        return amp * profiles::gaussian(rho, sigma);
      });
    };
    const ScalarField f = random_gaussian();
    const ScalarField h = random_gaussian();
    const ScalarField conv = lorentz::convolve(f, h);
    const double num = lorentz::lorentz_quasinorm(conv, params.out_idx);
    const double den = lorentz::lorentz_quasinorm(f, params.f_idx) *
                       lorentz::lorentz_quasinorm(h, params.g_idx);
    table.rows.push_back(RatioRow{"oneil", s, 0.0, num / den,
                                  std::numeric_limits<double>::quiet_NaN()});
  }
  return table;
}

RatioTable oseen_report(const Grid& g, double p, const std::array<int, 3>& alpha,
                        int samples, const std::vector<double>& t_grid,
                        std::uint64_t seed) {
  if (!(p > 3.0)) throw std::invalid_argument("oseen_report: need p > 3");
  const int order = alpha[0] + alpha[1] + alpha[2];
  if (order > 2 || alpha[0] < 0 || alpha[1] < 0 || alpha[2] < 0)
    throw std::invalid_argument("oseen_report: |alpha| must be <= 2");
  if (t_grid.empty()) throw std::invalid_argument("oseen_report: empty t grid");

  const double L = g.box_len;
  const double predicted = -0.5 * order - 1.5 * (1.0 / 3.0 - 1.0 / p);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  RatioTable table;
  table.predicted_slope = predicted;
  for (int s = 0; s < samples; ++s) {
    const double amp = 0.5 + unif(rng);
    Vec3 dir = {unif(rng) - 0.5, unif(rng) - 0.5, unif(rng) - 0.5};
    const double dn = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
    for (auto& d : dir) d /= dn;
    const double eps = (2.0 + 0.4 * unif(rng)) * g.spacing;

    const VectorField3 f = sample_field(
        g,
        [&](double x, double y, double z) -> Vec3 {
          const double rho = std::sqrt(x * x + y * y + z * z);
          const double v = amp * profiles::capped_power(rho, 1.0, eps) *
                           profiles::radial_taper(rho, 0.38 * L, 0.48 * L);
          return {v * dir[0], v * dir[1], v * dir[2]};
        },
        {0.5 * g.spacing, 0.5 * g.spacing, 0.5 * g.spacing});
    const double denom = lorentz::lorentz_quasinorm(f, lorentz::LorentzIndex::weak(3.0));
    const auto fh = spectral::forward(f);

    std::vector<double> logt, logn;
    std::vector<RatioRow> pending;
    for (double t : t_grid) {
      const VectorField3 ft = spectral::inverse(spectral::oseen_apply(fh, t, alpha));
      const double nrm = lorentz::lp_norm(ft, p);
      const double ratio = nrm * std::pow(t, -predicted) / denom;
      logt.push_back(std::log(t));
      logn.push_back(std::log(std::max(nrm, 1e-300)));
      pending.push_back(RatioRow{"oseen", s, t, ratio, 0.0});
    }
    const double slope = fit_slope(logt, logn);
    for (auto& row : pending) {
      row.fitted_slope = slope;
      table.rows.push_back(row);
    }
  }
  return table;
}

}  // namespace pns::inequality
