#include "pns/mild_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pns::solver {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class F>
void for_each_mode(const Grid& g, F&& f) {
  const int n = g.n;
  const double k0 = kTwoPi / g.box_len;
  const int nzh = n / 2 + 1;
  std::size_t idx = 0;
  for (int ix = 0; ix < n; ++ix) {
    const double kx = k0 * spectral::signed_freq(ix, n);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = k0 * spectral::signed_freq(iy, n);
      for (int iz = 0; iz < nzh; ++iz, ++idx) f(idx, kx, ky, k0 * iz);
    }
  }
}

// phi1(z) = (e^z - 1)/z, phi2(z) = (e^z - 1 - z)/z^2, stable near z = 0.
double phi1(double z) {
  if (std::abs(z) < 1e-5)
    return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
  return std::expm1(z) / z;
}

double phi2(double z) {
  if (std::abs(z) < 1e-4)
    return 0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0));
  return (std::expm1(z) - z) / (z * z);
}

/// div of the combined symmetric tensor T_ab = u_a u_b + u_a U_b + U_a u_b
/// (all three advection terms in one pass; T is symmetric so six transforms
/// suffice). Dealiased, NOT projected, positive sign.
spectral::SpectralVectorField3 combined_advection(const VectorField3& u,
                                                  const VectorField3* U) {
  const Grid& g = u.grid;
  const std::size_t sz = g.size();
  static constexpr int pairs[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
  std::array<std::vector<spectral::Complex>, 6> That;
  {
    std::vector<double> prod(sz);
    for (int e = 0; e < 6; ++e) {
      const int a = pairs[e][0], b = pairs[e][1];
      if (U) {
        const auto& Ua = U->comp[a];
        const auto& Ub = U->comp[b];
        for (std::size_t c = 0; c < sz; ++c)
          prod[c] = u.comp[a][c] * u.comp[b][c] + u.comp[a][c] * Ub[c] + Ua[c] * u.comp[b][c];
      } else {
        for (std::size_t c = 0; c < sz; ++c) prod[c] = u.comp[a][c] * u.comp[b][c];
      }
      ScalarField sf(g);
      sf.values.swap(prod);
      That[e] = spectral::forward_scalar(sf);
      prod.swap(sf.values);
    }
  }
  auto entry = [&](int a, int b) -> const std::vector<spectral::Complex>& {
    if (a > b) std::swap(a, b);
    if (a == 0) return That[b];
    if (a == 1) return That[2 + b];
    return That[5];
  };
  spectral::SpectralVectorField3 W(g);
  for_each_mode(g, [&](std::size_t idx, double kx, double ky, double kz) {
    for (int i = 0; i < 3; ++i) {
      const spectral::Complex s =
          kx * entry(0, i)[idx] + ky * entry(1, i)[idx] + kz * entry(2, i)[idx];
      W.comp[i][idx] = spectral::Complex(0.0, 1.0) * s;  // d_j T_ji
    }
  });
  spectral::dealias(W);
  return W;
}

class NonlinearTerm {
 public:
  NonlinearTerm(const Grid& g, const VectorField3* U) : grid_(g), has_U_(U != nullptr) {
    if (has_U_) {
      check_same_grid(g, U->grid);
      U_phys_ = *U;
      // grad U (9 physical fields) for the trilinear diagnostic.
      const auto Uh = spectral::forward(U_phys_);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          auto dU = Uh;
          const int n = g.n;
          for_each_mode(g, [&](std::size_t idx, double kx, double ky, double kz) {
            const double kj = (j == 0) ? kx : (j == 1) ? ky : kz;
            // Zero odd derivative on the Nyquist planes.
            const bool nyq = std::abs(kj) >= (kTwoPi / g.box_len) * (n / 2) - 1e-12;
            dU.comp[i][idx] *= spectral::Complex(0.0, nyq ? 0.0 : kj);
          });
          for (int c = 0; c < 3; ++c)
            if (c != i) std::fill(dU.comp[c].begin(), dU.comp[c].end(), spectral::Complex(0, 0));
          grad_U_[3 * i + j] = spectral::inverse(dU).comp[i];
        }
      }
    }
  }

  bool has_background() const { return has_U_; }
  const VectorField3& background() const { return U_phys_; }

  /// N(u) = -P div(u(x)u + u(x)U + U(x)u), dealiased. Optionally hands back
  /// the physical u and the trilinear integral int u.(u.grad U).
  spectral::SpectralVectorField3 eval(const spectral::SpectralVectorField3& uhat,
                                      VectorField3* u_phys_out = nullptr,
                                      double* trilinear_out = nullptr) const {
    const Grid& g = grid_;
    const std::size_t sz = g.size();
    VectorField3 u = spectral::inverse(uhat);

    if (trilinear_out) {
      long double acc = 0.0L;
      if (has_U_) {
        for (std::size_t c = 0; c < sz; ++c) {
          double s = 0.0;
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              s += u.comp[i][c] * u.comp[j][c] * grad_U_[3 * i + j][c];
          acc += s;
        }
      }
      *trilinear_out = static_cast<double>(acc) * g.cell_measure;
    }

    // N = -P div(T).
    auto N = combined_advection(u, has_U_ ? &U_phys_ : nullptr);
    for (int c = 0; c < 3; ++c)
      for (auto& z : N.comp[c]) z = -z;
    spectral::leray_project(N);

    if (u_phys_out) *u_phys_out = std::move(u);
    return N;
  }

 private:
  Grid grid_;
  bool has_U_ = false;
  VectorField3 U_phys_;
  std::array<std::vector<double>, 9> grad_U_;  // [3i + j] = dU_i/dx_j
};

NormRow make_norm_row(double t, const VectorField3& u_phys, double l2, double h1dot,
                      double q, const std::vector<double>& p_list) {
  NormRow row;
  row.t = t;
  row.l2 = l2;
  row.h1dot = h1dot;
  const auto summary = lorentz::distribution_summary(u_phys);
  row.l3 = lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::pq(3.0, 3.0));
  row.l3q = (q >= 3.0 && std::isfinite(q))
                ? lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::pq(3.0, q))
                : lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::weak(3.0));
  row.l3winf = lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::weak(3.0));
  for (double p : p_list) row.lp.push_back(lorentz::lp_norm(u_phys, p));
  return row;
}

double kato_weight(double t, double p) {
  return t <= 0.0 ? 0.0 : std::pow(t, 0.5 - 1.5 / p) / p;
}

spectral::SpectralVectorField3 prepared_initial(const VectorField3& u0) {
  auto uh = spectral::forward(u0);
  spectral::leray_project(uh);
  spectral::dealias(uh);
  return uh;
}

}  // namespace

std::string SolutionTrajectory::norms_csv() const {
  std::ostringstream os;
  os << "t,L2,L3,L3q,L3winf,H1dot";
  for (double p : config.kato_p_list) {
    os << ",K" << p;
  }
  os << "\n";
  char buf[64];
  for (const auto& r : norms) {
    std::snprintf(buf, sizeof buf, "%.17g", r.t);
    os << buf;
    for (double v : {r.l2, r.l3, r.l3q, r.l3winf, r.h1dot}) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      os << buf;
    }
    for (std::size_t i = 0; i < r.lp.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", kato_weight(r.t, config.kato_p_list[i]) * r.lp[i]);
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

const VectorField3* SolutionTrajectory::snapshot_at(double t, double tol) const {
  for (std::size_t i = 0; i < snapshot_times.size(); ++i)
    if (std::abs(snapshot_times[i] - t) <= tol) return &snapshots[i];
  return nullptr;
}

VectorField3 caloric(const VectorField3& u0, double t) {
  if (t < 0.0) throw std::invalid_argument("caloric: t must be >= 0");
  if (t == 0.0) return u0;
  auto uh = spectral::forward(u0);
  spectral::heat_propagate(uh, t);
  return spectral::inverse(uh);
}

FieldSeries FieldSeries::constant(const VectorField3& f, double dt, int n_nodes) {
  FieldSeries s;
  s.grid = f.grid;
  s.dt = dt;
  const auto fh = spectral::forward(f);
  s.nodes.assign(n_nodes, fh);
  return s;
}

FieldSeries FieldSeries::caloric_series(const VectorField3& u0, double dt, int n_nodes) {
  FieldSeries s;
  s.grid = u0.grid;
  s.dt = dt;
  auto uh = spectral::forward(u0);
  s.nodes.reserve(n_nodes);
  s.nodes.push_back(uh);
  const auto step = [&](spectral::SpectralVectorField3& f) {
    spectral::heat_propagate(f, dt);
  };
  for (int j = 1; j < n_nodes; ++j) {
    step(uh);
    s.nodes.push_back(uh);
  }
  return s;
}

int FieldSeries::index_of(double t) const {
  const double x = t / dt;
  const int j = static_cast<int>(std::lround(x));
  if (j < 0 || j >= static_cast<int>(nodes.size()) || std::abs(x - j) > 1e-9)
    throw std::invalid_argument("FieldSeries: time " + std::to_string(t) +
                                " is not on the sampled grid");
  return j;
}

namespace {

void check_series_compatible(const FieldSeries& u, const FieldSeries& v) {
  check_same_grid(u.grid, v.grid);
  if (std::abs(u.dt - v.dt) > 1e-15 || u.nodes.size() != v.nodes.size())
    throw std::invalid_argument("duhamel_B: trajectory time grids mismatch");
}

/// Advection tensor integrand W(s) = div(u (x) v) at one interpolated time,
/// dealiased, WITHOUT the projection (applied once at the end).
spectral::SpectralVectorField3 advection_at(const FieldSeries& u, const FieldSeries& v,
                                            int j, double frac) {
  const auto lerp = [&](const FieldSeries& s) {
    auto a = s.nodes[j];
    if (frac > 0.0) {
      const auto& b = s.nodes[j + 1];
      for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a.comp[c].size(); ++i)
          a.comp[c][i] = (1.0 - frac) * a.comp[c][i] + frac * b.comp[c][i];
    }
    return spectral::inverse(a);
  };
  const VectorField3 up = lerp(u);
  const VectorField3 vp = lerp(v);
  return spectral::advection_divergence_spectral(up, vp);
}

/// Shared quadrature core: exact heat weights against midpoint-frozen W.
/// Runs the semigroup recurrence S <- e^{-k^2 ds} S + w(k^2, ds) W_mid and
/// emits -P S at every node time. emit(j, value) is called for j = 1..M.
template <class Emit>
void duhamel_scan(const FieldSeries& u, const FieldSeries& v, int substeps, int upto,
                  Emit&& emit) {
  const Grid& g = u.grid;
  const double ds = u.dt / substeps;
  spectral::SpectralVectorField3 S(g);
  std::vector<double> k2(spectral::spectral_size(g));
  for_each_mode(g, [&](std::size_t idx, double kx, double ky, double kz) {
    k2[idx] = kx * kx + ky * ky + kz * kz;
  });
  for (int j = 0; j < upto; ++j) {
    for (int q = 0; q < substeps; ++q) {
      const double frac = (q + 0.5) / substeps;
      const auto W = advection_at(u, v, j, frac);
      for (std::size_t idx = 0; idx < k2.size(); ++idx) {
        const double a = k2[idx] * ds;
        const double decay = std::exp(-a);
        // integral of e^{-k^2 (sub_end - s)} over the substep
        const double w = ds * phi1(-a);
        for (int c = 0; c < 3; ++c)
          S.comp[c][idx] = decay * S.comp[c][idx] + w * W.comp[c][idx];
      }
    }
    auto B = spectral::scaled(S, -1.0);
    spectral::leray_project(B);
    emit(j + 1, std::move(B));
  }
}

}  // namespace

VectorField3 duhamel_B(const FieldSeries& u, const FieldSeries& v, double t,
                       int substeps) {
  check_series_compatible(u, v);
  if (substeps < 1) throw std::invalid_argument("duhamel_B: substeps must be >= 1");
  const int J = u.index_of(t);
  if (J == 0) return VectorField3(u.grid);
  VectorField3 out(u.grid);
  duhamel_scan(u, v, substeps, J, [&](int j, spectral::SpectralVectorField3&& B) {
    if (j == J) out = spectral::inverse(B);
  });
  return out;
}

FieldSeries duhamel_B_series(const FieldSeries& u, const FieldSeries& v, int substeps) {
  check_series_compatible(u, v);
  if (substeps < 1) throw std::invalid_argument("duhamel_B_series: substeps must be >= 1");
  FieldSeries out;
  out.grid = u.grid;
  out.dt = u.dt;
  out.nodes.assign(u.nodes.size(), spectral::SpectralVectorField3(u.grid));
  duhamel_scan(u, v, substeps, static_cast<int>(u.nodes.size()) - 1,
               [&](int j, spectral::SpectralVectorField3&& B) { out.nodes[j] = std::move(B); });
  return out;
}

SolutionTrajectory time_step_solve(const VectorField3& u0, const VectorField3* U,
                                   const SolverConfig& config) {
  if (!(config.dt > 0.0) || !(config.t_end >= config.dt))
    throw std::invalid_argument("time_step_solve: need 0 < dt <= t_end");
  if (!all_finite(u0)) throw std::invalid_argument("time_step_solve: u0 not finite");

  const Grid& g = u0.grid;
  SolutionTrajectory traj;
  traj.grid = g;
  traj.config = config;

  const int n_steps = static_cast<int>(std::lround(config.t_end / config.dt));
  const double dt = config.dt;
  NonlinearTerm nonlinear(g, U);

  // Integrating-factor tables for the fixed step.
  const std::size_t nc = spectral::spectral_size(g);
  std::vector<double> decay(nc), w1(nc), w2(nc);
  for_each_mode(g, [&](std::size_t idx, double kx, double ky, double kz) {
    const double z = -(kx * kx + ky * ky + kz * kz) * dt;
    decay[idx] = std::exp(z);
    w1[idx] = dt * phi1(z);
    w2[idx] = dt * phi2(z);
  });

  auto uhat = prepared_initial(u0);
  const double u_max0 = max_abs(u0);
  const double U_max = U ? max_abs(*U) : 0.0;
  traj.max_cfl = (u_max0 + U_max) * dt / g.spacing;

  const auto record = [&](int step, const spectral::SpectralVectorField3& uh,
                          const VectorField3& u_phys, double tri) {
    const double t = step * dt;
    const double l2 = spectral::l2_norm(uh);
    const double h1 = spectral::h1dot_norm(uh);
    traj.steps.push_back(StepRow{t, l2, h1, tri});
    const bool norm_due = (step % std::max(1, config.norm_stride) == 0) || step == n_steps;
    if (norm_due)
      traj.norms.push_back(make_norm_row(t, u_phys, l2, h1, config.q, config.kato_p_list));
    const bool snap_due =
        (config.snapshot_stride > 0 && step % config.snapshot_stride == 0) ||
        step == 0 || step == n_steps;
    if (snap_due) {
      traj.snapshot_times.push_back(t);
      traj.snapshots.push_back(u_phys);
    }
  };

  VectorField3 u_phys;
  double tri = 0.0;
  for (int step = 0; step < n_steps; ++step) {
    const auto N1 = nonlinear.eval(uhat, &u_phys, &tri);
    record(step, uhat, u_phys, tri);

    const double cfl = (max_abs(u_phys) + U_max) * dt / g.spacing;
    traj.max_cfl = std::max(traj.max_cfl, cfl);

    spectral::SpectralVectorField3 a(g);
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < nc; ++i)
        a.comp[c][i] = decay[i] * uhat.comp[c][i] + w1[i] * N1.comp[c][i];

    if (config.scheme == Scheme::etd2) {
      const auto N2 = nonlinear.eval(a);
      for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < nc; ++i)
          a.comp[c][i] += w2[i] * (N2.comp[c][i] - N1.comp[c][i]);
    }
    uhat = std::move(a);

    if (!std::isfinite(spectral::l2_norm(uhat))) {
      traj.status = SolutionTrajectory::Status::aborted_nan;
      traj.last_good_time = step * dt;
      return traj;
    }
  }
  u_phys = spectral::inverse(uhat);
  record(n_steps, uhat, u_phys, nonlinear.has_background() ? tri : 0.0);
  traj.last_good_time = n_steps * dt;
  return traj;
}

namespace {

struct SeriesNorms {
  double X = 0.0;
  double Y = 0.0;
  double K = 0.0;
};

SeriesNorms series_x_norm(const FieldSeries& s, double q,
                          const std::vector<double>& p_list) {
  SeriesNorms out;
  for (std::size_t j = 0; j < s.nodes.size(); ++j) {
    const double t = j * s.dt;
    const VectorField3 u = spectral::inverse(s.nodes[j]);
    const auto summary = lorentz::distribution_summary(u);
    const double l3q =
        std::isfinite(q) ? lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::pq(3.0, q))
                         : lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::weak(3.0));
    out.Y = std::max(out.Y, l3q);
    if (t > 0.0)
      for (double p : p_list)
        out.K = std::max(out.K, kato_weight(t, p) * lorentz::lp_norm(u, p));
  }
  out.X = std::max(out.Y, out.K);
  return out;
}

FieldSeries series_sub(const FieldSeries& a, const FieldSeries& b) {
  FieldSeries r = a;
  for (std::size_t j = 0; j < r.nodes.size(); ++j)
    r.nodes[j] = spectral::sub(a.nodes[j], b.nodes[j]);
  return r;
}

/// One Picard update: e0 + B(e,e) + B(e,U) + B(U,e), evaluated through the
/// combined symmetric tensor in a single Duhamel scan.
FieldSeries picard_map(const FieldSeries& e0s, const FieldSeries& e,
                       const VectorField3* U, int substeps) {
  const Grid& g = e0s.grid;
  FieldSeries out = e0s;
  const int M = static_cast<int>(e.nodes.size()) - 1;
  const double ds = e.dt / substeps;

  std::vector<double> k2(spectral::spectral_size(g));
  for_each_mode(g, [&](std::size_t idx, double kx, double ky, double kz) {
    k2[idx] = kx * kx + ky * ky + kz * kz;
  });

  spectral::SpectralVectorField3 S(g);
  for (int j = 0; j < M; ++j) {
    for (int qq = 0; qq < substeps; ++qq) {
      const double frac = (qq + 0.5) / substeps;
      auto mid = e.nodes[j];
      for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < mid.comp[c].size(); ++i)
          mid.comp[c][i] = (1.0 - frac) * mid.comp[c][i] + frac * e.nodes[j + 1].comp[c][i];
      const VectorField3 mid_phys = spectral::inverse(mid);
      const auto W = combined_advection(mid_phys, U);
      for (std::size_t idx = 0; idx < k2.size(); ++idx) {
        const double a = k2[idx] * ds;
        const double dec = std::exp(-a);
        const double w = ds * phi1(-a);
        for (int c = 0; c < 3; ++c)
          S.comp[c][idx] = dec * S.comp[c][idx] + w * W.comp[c][idx];
      }
    }
    auto B = spectral::scaled(S, -1.0);
    spectral::leray_project(B);
    out.nodes[j + 1] = spectral::add(out.nodes[j + 1], B);
  }
  return out;
}

}  // namespace

std::pair<SolutionTrajectory, PicardRunReport> picard_solve(const VectorField3& u0,
                                                            const VectorField3* U,
                                                            const SolverConfig& config,
                                                            double eps1_threshold,
                                                            double eps2_threshold) {
  const Grid& g = u0.grid;
  if (g.n > 32)
    throw std::invalid_argument("picard_solve: coarse grids only (n <= 32); use "
                                "time_step_solve for finer resolutions");
  if (!(config.dt > 0.0) || !(config.t_end >= config.dt))
    throw std::invalid_argument("picard_solve: need 0 < dt <= t_end");

  const int M = static_cast<int>(std::lround(config.t_end / config.dt));
  PicardRunReport report;

  // Smallness gates: warn, do not abort.
  const double u0_norm =
      lorentz::lorentz_quasinorm(u0, std::isfinite(config.q)
                                         ? lorentz::LorentzIndex::pq(3.0, config.q)
                                         : lorentz::LorentzIndex::weak(3.0));
  const double U_norm =
      U ? lorentz::lorentz_quasinorm(*U, lorentz::LorentzIndex::weak(3.0)) : 0.0;
  if (eps1_threshold > 0.0 && U_norm > eps1_threshold) {
    report.smallness_ok = false;
    report.warning += "||U||_{3,inf} = " + std::to_string(U_norm) + " exceeds eps1 = " +
                      std::to_string(eps1_threshold) + "; ";
  }
  if (eps2_threshold > 0.0 && u0_norm > eps2_threshold) {
    report.smallness_ok = false;
    report.warning += "||u0||_{3,q} = " + std::to_string(u0_norm) + " exceeds eps2 = " +
                      std::to_string(eps2_threshold) + "; ";
  }

  // Initial data hygiene matching the stepper.
  const VectorField3 u0_clean = spectral::inverse(prepared_initial(u0));
  FieldSeries e0s = FieldSeries::caloric_series(u0_clean, config.dt, M + 1);

  FieldSeries e = e0s;
  fixedpoint::PicardTrace trace;
  auto x0 = series_x_norm(e0s, config.q, config.kato_p_list);
  trace.rows.push_back({0, x0.X, 0.0, std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()});
  const double tol = 1e-9 * std::max(1.0, x0.X);
  double prev_diff = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  for (int it = 1; it <= config.picard_iters; ++it) {
    FieldSeries e_next = picard_map(e0s, e, U, 1);
    const double diff = series_x_norm(series_sub(e_next, e), config.q, config.kato_p_list).X;
    const double xn = series_x_norm(e_next, config.q, config.kato_p_list).X;
    const double ratio = (std::isfinite(prev_diff) && prev_diff > 0.0)
                             ? diff / prev_diff
                             : std::numeric_limits<double>::quiet_NaN();
    trace.rows.back().residual = diff;
    trace.rows.push_back({it, xn, diff, ratio, std::numeric_limits<double>::quiet_NaN()});
    e = std::move(e_next);
    prev_diff = diff;
    if (!std::isfinite(diff) || !std::isfinite(xn)) {
      report.warning += "iteration diverged (non-finite norms); ";
      break;
    }
    if (diff <= tol) {
      converged = true;
      break;
    }
  }
  {
    FieldSeries mapped = picard_map(e0s, e, U, 1);
    trace.residual = series_x_norm(series_sub(mapped, e), config.q, config.kato_p_list).X;
    trace.rows.back().residual = trace.residual;
    trace.converged = converged && trace.residual <= 10.0 * tol;
    if (!trace.converged && report.warning.empty())
      report.warning = "picard iteration did not reach tolerance; residual = " +
                       std::to_string(trace.residual);
  }
  report.trace = trace;

  // Materialize the trajectory from the last iterate.
  SolutionTrajectory traj;
  traj.grid = g;
  traj.config = config;
  for (int j = 0; j <= M; ++j) {
    const double t = j * config.dt;
    const VectorField3 u = spectral::inverse(e.nodes[j]);
    const double l2 = spectral::l2_norm(e.nodes[j]);
    const double h1 = spectral::h1dot_norm(e.nodes[j]);
    traj.steps.push_back(StepRow{t, l2, h1, 0.0});
    traj.norms.push_back(make_norm_row(t, u, l2, h1, config.q, config.kato_p_list));
    traj.snapshot_times.push_back(t);
    traj.snapshots.push_back(u);
  }
  traj.last_good_time = M * config.dt;
  return {traj, report};
}

KatoNorms kato_norms(const SolutionTrajectory& traj, const std::vector<double>& p_list,
                     double q) {
  for (double p : p_list)
    if (!(p > 3.0) || !std::isfinite(p))
      throw std::invalid_argument("kato_norms: p_list must lie in (3, inf)");
  KatoNorms out;
  out.per_p.resize(p_list.size());
  for (std::size_t i = 0; i < p_list.size(); ++i) out.per_p[i] = {p_list[i], 0.0};
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const double t = traj.snapshot_times[s];
    const auto& u = traj.snapshots[s];
    const auto summary = lorentz::distribution_summary(u);
    const double l3q =
        std::isfinite(q) ? lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::pq(3.0, q))
                         : lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::weak(3.0));
    out.Y = std::max(out.Y, l3q);
    if (t > 0.0)
      for (std::size_t i = 0; i < p_list.size(); ++i) {
        const double v = kato_weight(t, p_list[i]) * lorentz::lp_norm(u, p_list[i]);
        out.per_p[i].second = std::max(out.per_p[i].second, v);
      }
  }
  for (const auto& [p, v] : out.per_p) out.K = std::max(out.K, v);
  out.X = std::max(out.K, out.Y);
  return out;
}

EnergyReport energy_monitor(const SolutionTrajectory& traj, const VectorField3* U) {
  EnergyReport rep;
  const auto& st = traj.steps;
  if (st.size() < 3) return rep;
  const double dt = st[1].t - st[0].t;

  double e_scale = 0.0;
  for (const auto& r : st) e_scale = std::max(e_scale, 0.5 * r.l2 * r.l2);
  if (e_scale == 0.0) return rep;

  // Simpson residual of E' + D + T = 0 over step pairs.
  for (std::size_t j = 0; j + 2 < st.size(); j += 2) {
    const double E0 = 0.5 * st[j].l2 * st[j].l2;
    const double E2 = 0.5 * st[j + 2].l2 * st[j + 2].l2;
    auto integrand = [&](std::size_t i) {
      return st[i].h1dot * st[i].h1dot + st[i].trilinear;
    };
    const double integral =
        (integrand(j) + 4.0 * integrand(j + 1) + integrand(j + 2)) * dt / 3.0;
    rep.max_rel_residual =
        std::max(rep.max_rel_residual, std::abs(E2 - E0 + integral) / e_scale);
  }

  rep.A = U ? lorentz::lorentz_quasinorm(*U, lorentz::LorentzIndex::weak(3.0)) : 0.0;
  if (rep.A > 0.0) {
    for (const auto& r : st) {
      const double D = r.h1dot * r.h1dot;
      if (D > 1e-14 * e_scale)
        rep.K_hat = std::max(rep.K_hat, std::max(0.0, -r.trilinear) / (rep.A * D));
    }
    rep.AK = rep.A * rep.K_hat;
    rep.ak_below_one = rep.AK < 1.0;
  }

  // Strong-energy-inequality form over sampled pairs (s <= t).
  std::vector<double> dissipation_prefix(st.size(), 0.0);
  for (std::size_t j = 1; j < st.size(); ++j) {
    const double Dm = st[j - 1].h1dot * st[j - 1].h1dot;
    const double Dp = st[j].h1dot * st[j].h1dot;
    dissipation_prefix[j] = dissipation_prefix[j - 1] + 0.5 * dt * (Dm + Dp);
  }
  std::vector<std::size_t> samples;
  const std::size_t stride = std::max<std::size_t>(1, st.size() / 24);
  for (std::size_t j = 0; j < st.size(); j += stride) samples.push_back(j);
  if (samples.back() != st.size() - 1) samples.push_back(st.size() - 1);
  rep.worst_pair_slack = -1e300;
  for (std::size_t a = 0; a < samples.size(); ++a) {
    for (std::size_t b = a + 1; b < samples.size(); ++b) {
      const std::size_t s = samples[a], t = samples[b];
      const double Es = 0.5 * st[s].l2 * st[s].l2;
      const double Et = 0.5 * st[t].l2 * st[t].l2;
      const double lhs =
          Et + (1.0 - rep.AK) * (dissipation_prefix[t] - dissipation_prefix[s]);
      // In L^2-norm-squared form the inequality carries the factor 2 on the
      // dissipation; with E = 1/2 ||u||^2 both sides halve.
      const double slack = (lhs - Es) / std::max(Es, 1e-300);
      rep.worst_pair_slack = std::max(rep.worst_pair_slack, slack);
      ++rep.pairs_checked;
    }
  }
  rep.inequality_holds = rep.worst_pair_slack <= 1e-6;
  return rep;
}

CaloricConvergenceReport caloric_convergence_report(const VectorField3& u0,
                                                    const lorentz::LorentzIndex& idx,
                                                    const std::vector<double>& t_grid) {
  CaloricConvergenceReport rep;
  rep.u0_norm = lorentz::lorentz_quasinorm(u0, idx);
  std::vector<double> ts = t_grid;
  std::sort(ts.begin(), ts.end(), std::greater<double>());
  const auto uh = spectral::forward(u0);
  rep.min_over_u0_norm = 1e300;
  for (double t : ts) {
    if (!(t > 0.0)) throw std::invalid_argument("caloric_convergence_report: t must be > 0");
    const VectorField3 ut = spectral::inverse(spectral::heat_propagated(uh, t));
    const double d = lorentz::lorentz_quasinorm(sub(ut, u0), idx);
    rep.series.push_back({t, d});
    rep.max_value = std::max(rep.max_value, d);
    if (rep.u0_norm > 0.0)
      rep.min_over_u0_norm = std::min(rep.min_over_u0_norm, d / rep.u0_norm);
  }
  if (rep.u0_norm == 0.0) rep.min_over_u0_norm = 0.0;
  rep.final_over_max =
      rep.max_value > 0.0 ? rep.series.back().diff_norm / rep.max_value : 0.0;
  return rep;
}

}  // namespace pns::solver
