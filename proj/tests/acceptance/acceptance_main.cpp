// Acceptance suite: every criterion below runs at its stated tolerance and
// prints one pass/fail line. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "pns/dss.hpp"
#include "pns/experiment.hpp"
#include "pns/fixed_point.hpp"
#include "pns/grid.hpp"
#include "pns/inequality.hpp"
#include "pns/landau.hpp"
#include "pns/lorentz.hpp"
#include "pns/mild_solver.hpp"
#include "pns/spectral.hpp"

using namespace pns;

namespace {

int failures = 0;

struct Criterion {
  int id;
  const char* name;
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED " + what;
    } else {
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

void run(int id, const char* name, const std::function<void(Criterion&)>& body) {
  Criterion c{id, name};
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.pass = false;
    c.detail += std::string("; exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("[%s] criterion %2d %-28s (%.1fs) %s\n", c.pass ? "PASS" : "FAIL", id,
              name, secs, c.detail.c_str());
  std::fflush(stdout);
  if (!c.pass) ++failures;
}

std::string fmt(const char* label, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s=%.3g", label, v);
  return buf;
}

VectorField3 random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  VectorField3 u(g);
  for (int c = 0; c < 3; ++c)
    for (auto& v : u.comp[c]) v = gauss(rng);
  return u;
}

double rel_l3_diff(const VectorField3& a, const VectorField3& b) {
  return lorentz::lp_norm(sub(a, b), 3.0) / lorentz::lp_norm(b, 3.0);
}

// Calibrated smallness gates; see configs/stability.toml for provenance.
constexpr double kEps1 = 2.2;
constexpr double kEps2 = 0.35;

void criterion1_lorentz_identity(Criterion& c) {
  const Grid g = build_grid(16, 8.0);
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const VectorField3 f = random_field(g, rng);
    const auto summary = lorentz::distribution_summary(f);
    for (double p : {2.0, 2.5, 3.0, 4.0}) {
      const double a = lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::pq(p, p));
      const double b = lorentz::lp_norm(f, p);
      worst = std::max(worst, std::abs(a - b) / b);
    }
  }
  c.require(worst <= 1e-10, fmt("max_rel", worst) + " tol 1e-10");
}

void criterion2_indicator(Criterion& c) {
  const Grid g = build_grid(16, 8.0);
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    ScalarField ind(g);
    std::size_t m = 0;
    const double density = 0.02 + 0.3 * unif(rng);
    for (auto& v : ind.values)
      if (unif(rng) < density) {
        v = 1.0;
        ++m;
      }
    if (m == 0) {
      ind.values[0] = 1.0;
      m = 1;
    }
    const double meas = static_cast<double>(m) * g.cell_measure;
    const auto summary = lorentz::distribution_summary(ind);
    for (double p : {2.0, 3.0, 5.0}) {
      for (double q : {2.5, 3.0, 8.0}) {
        const double got = lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::pq(p, q));
        const double want = std::pow(p / q, 1.0 / q) * std::pow(meas, 1.0 / p);
        worst = std::max(worst, std::abs(got - want) / want);
      }
      const double gotw = lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::weak(p));
      const double wantw = std::pow(meas, 1.0 / p);
      worst = std::max(worst, std::abs(gotw - wantw) / wantw);
    }
  }
  c.require(worst <= 1e-12, fmt("max_rel", worst) + " tol 1e-12");
}

void criterion3_weak_norm_inverse(Criterion& c) {
  const Grid g = build_grid(128, 32.0);
  const double cap = 8.0 * g.spacing;
  const ScalarField f = sample_scalar(
      g,
      [&](double x, double y, double z) {
        const double rho = std::sqrt(x * x + y * y + z * z);
        return std::min(1.0 / std::max(rho, 1e-300), 1.0 / cap);
      },
      {0.5 * g.spacing, 0.5 * g.spacing, 0.5 * g.spacing});
  const double got = lorentz::lorentz_quasinorm(f, lorentz::LorentzIndex::weak(3.0));
  const double want = std::cbrt(4.0 * std::numbers::pi / 3.0);
  const double rel = std::abs(got - want) / want;
  c.require(rel <= 0.02, fmt("value", got) + " " + fmt("target", want) + " " +
                             fmt("rel", rel) + " tol 2%");
}

void criterion4_spectral_exactness(Criterion& c) {
  const Grid g = build_grid(32, 16.0);
  std::mt19937_64 rng(1004);
  const VectorField3 f = random_field(g, rng);

  const VectorField3 f2 = spectral::inverse(spectral::forward(f));
  double rt = 0.0, scale = 0.0;
  for (int cc = 0; cc < 3; ++cc)
    for (std::size_t i = 0; i < f.comp[cc].size(); ++i) {
      rt = std::max(rt, std::abs(f2.comp[cc][i] - f.comp[cc][i]));
      scale = std::max(scale, std::abs(f.comp[cc][i]));
    }
  c.require(rt / scale <= 1e-12, fmt("roundtrip", rt / scale));

  auto fh = spectral::forward(f);
  spectral::leray_project(fh);
  const double div = spectral::max_divergence(fh) / spectral::max_mode_norm(fh);
  auto fh2 = fh;
  spectral::leray_project(fh2);
  const double idem =
      spectral::max_mode_norm(spectral::sub(fh2, fh)) / spectral::max_mode_norm(fh);
  c.require(div <= 1e-12 && idem <= 1e-12,
            fmt("leray_div", div) + " " + fmt("idem", idem));

  const double k0 = 2.0 * std::numbers::pi / g.box_len;
  const VectorField3 gradphi = sample_field(g, [&](double x, double y, double) -> Vec3 {
    const double ph = k0 * (x + 2.0 * y);
    return {k0 * std::cos(ph), 2.0 * k0 * std::cos(ph), 0.0};
  });
  auto gh = spectral::forward(gradphi);
  const double before = spectral::max_mode_norm(gh);
  spectral::leray_project(gh);
  c.require(spectral::max_mode_norm(gh) <= 1e-12 * before,
            fmt("grad_annihilation", spectral::max_mode_norm(gh) / before));

  auto a = spectral::heat_propagated(spectral::heat_propagated(spectral::forward(f), 0.4), 0.6);
  auto b = spectral::heat_propagated(spectral::forward(f), 1.0);
  const double semi =
      spectral::max_mode_norm(spectral::sub(a, b)) / spectral::max_mode_norm(b);
  c.require(semi <= 1e-13, fmt("semigroup", semi));
}

void criterion5_exponents(Criterion& c) {
  const Grid g = build_grid(128, 1.0);
  std::vector<double> ts;
  for (int i = 0; i < 8; ++i)
    ts.push_back(1e-3 * std::pow(4e-2 / 1e-3, i / 7.0));

  {
    const auto table = inequality::heat_report(g, 6.0, 3.0,
                                               lorentz::LorentzIndex::pq(6.0, 6.0), 2,
                                               ts, 1005);
    const double slope = table.mean_fitted_slope();
    const double target = table.predicted_slope;  // -0.25
    const double rel = std::abs(slope - target) / std::abs(target);
    c.require(rel <= 0.05,
              fmt("heat_slope", slope) + " " + fmt("target", target) + " " +
                  fmt("rel", rel));
  }
  {
    const auto table = inequality::oseen_report(g, 6.0, {1, 0, 0}, 2, ts, 1006);
    const double slope = table.mean_fitted_slope();
    const double target = table.predicted_slope;  // -0.75
    const double rel = std::abs(slope - target) / std::abs(target);
    c.require(rel <= 0.05,
              fmt("oseen_slope", slope) + " " + fmt("target", target) + " " +
                  fmt("rel", rel));
  }
}

void criterion6_landau(Criterion& c) {
  const landau::LandauParams p{2.0, {0, 0, 1}};

  // Divergence of the closed form converges at order >= 1.8 in the step.
  const auto d1 = landau::divergence_probe(p, 1.0, 3.0, 1e-2, 400, 1007);
  const auto d2 = landau::divergence_probe(p, 1.0, 3.0, 5e-3, 400, 1007);
  const auto d3 = landau::divergence_probe(p, 1.0, 3.0, 2.5e-3, 400, 1007);
  const double o1 = std::log2(d1.rms_div / d2.rms_div);
  const double o2 = std::log2(d2.rms_div / d3.rms_div);
  c.require(o1 >= 1.8 && o2 >= 1.8,
            fmt("div_order1", o1) + " " + fmt("div_order2", o2));

  // Stationary residual under refinement.
  const auto rep = landau::residual_report(p, 1.0, 3.0, {32, 64, 128}, 12.0, 0.8);
  const double order_last = rep.rows[2].order_estimate;
  c.require(rep.rows[1].residual < rep.rows[0].residual &&
                rep.rows[2].residual < rep.rows[1].residual && order_last >= 1.8,
            fmt("res32", rep.rows[0].residual) + " " + fmt("res64", rep.rows[1].residual) +
                " " + fmt("res128", rep.rows[2].residual) + " " +
                fmt("order", order_last));

  // Homogeneity.
  std::mt19937_64 rng(1008);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 x = {unif(rng) + 1.5, unif(rng), unif(rng)};
    const Vec3 u = landau::landau_velocity(x, p);
    for (double lam : {2.0, 0.5, 10.0}) {
      const Vec3 ul = landau::landau_velocity({lam * x[0], lam * x[1], lam * x[2]}, p);
      for (int cc = 0; cc < 3; ++cc)
        worst = std::max(worst, std::abs(lam * ul[cc] - u[cc]) /
                                    std::max(1e-12, std::abs(u[cc])));
    }
  }
  c.require(worst <= 1e-12, fmt("homogeneity", worst));

  // Monotone weak norm in a.
  const Grid g = build_grid(64, 16.0);
  double prev = 1e300;
  bool monotone = true;
  for (double a : {2.0, 4.0, 8.0, 16.0, 32.0}) {
    const auto bg = landau::landau_background(g, {a, {0, 0, 1}}, 0.5);
    if (!(bg.weak_l3_norm < prev)) monotone = false;
    prev = bg.weak_l3_norm;
  }
  c.require(monotone, "weak norm strictly decreasing over a in {2,4,8,16,32}");
}

void criterion7_fixed_point(Criterion& c) {
  using namespace fixedpoint;
  {
    ScalarSpace sp;
    auto B = [](double x, double y) { return x * y; };
    auto [e, trace] = solve_picard(sp, 0.2, B, 1.0 / 16.0, 1.0, 0.2);
    const double want = (-9.0 / 8.0 + std::sqrt(81.0 / 64.0 + 0.8)) / 2.0;
    c.require(std::abs(e - want) <= 1e-12, fmt("scalar_err", std::abs(e - want)));
  }
  double worst_ratio = 0.0, worst_norm = 0.0, worst_pair = 0.0;
  for (int s = 0; s < 50; ++s) {
    EuclideanSpace sp{8};
    std::mt19937_64 rng(2000 + s);
    std::normal_distribution<double> gauss;
    std::vector<double> T(512);
    double fro = 0.0;
    for (auto& t : T) {
      t = gauss(rng);
      fro += t * t;
    }
    fro = std::sqrt(fro);
    for (auto& t : T) t /= fro;
    auto B = [&T](const std::vector<double>& x, const std::vector<double>& y) {
      std::vector<double> r(8, 0.0);
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
          for (int k = 0; k < 8; ++k) r[i] += T[(i * 8 + j) * 8 + k] * x[j] * y[k];
      return r;
    };
    const auto U = sp.scale(1.0 / 32.0, sp.random_unit(rng));
    const auto e0 = sp.scale(0.2, sp.random_unit(rng));
    auto [e, trace] = solve_picard(sp, e0, B, U, 1.0, 0.2);
    worst_ratio = std::max(worst_ratio, trace.max_ratio());
    worst_norm = std::max(worst_norm, trace.max_norm());
    const auto uniq = uniqueness_probe(sp, e0, B, U, 1.0, 0.2, 3);
    worst_pair = std::max(worst_pair, uniq.max_pairwise);
  }
  c.require(worst_ratio <= 7.0 / 8.0 + 1e-9, fmt("max_ratio", worst_ratio));
  c.require(worst_norm <= 1.5 * 0.2 + 1e-12, fmt("max_norm", worst_norm));
  c.require(worst_pair <= 1e-10, fmt("uniqueness", worst_pair));
}

void criterion8_solver_consistency(Criterion& c) {
  const Grid g = build_grid(16, 8.0);
  const VectorField3 u0 = experiment::make_bump_data(
      g, 1.0, 0.1, lorentz::LorentzIndex::pq(3.0, 3.0), 1010);

  {
    solver::SolverConfig cfg;
    cfg.dt = 0.005;
    cfg.t_end = 1.0;
    cfg.snapshot_stride = 200;
    cfg.norm_stride = 200;
    auto [ptraj, rep] = solver::picard_solve(u0, nullptr, cfg);
    const auto etraj = solver::time_step_solve(u0, nullptr, cfg);
    const VectorField3* pe = ptraj.snapshot_at(1.0, 1e-9);
    const VectorField3* ee = etraj.snapshot_at(1.0, 1e-9);
    const double diff = rel_l3_diff(*pe, *ee);
    c.require(rep.trace.converged && diff <= 1e-3, fmt("picard_vs_etd", diff));
  }
  {
    const VectorField3 u0b = experiment::make_bump_data(
        g, 1.0, 0.8, lorentz::LorentzIndex::pq(3.0, 3.0), 1011);
    auto run = [&](double dt) {
      solver::SolverConfig cfg;
      cfg.dt = dt;
      cfg.t_end = 0.4;
      cfg.snapshot_stride = 0;
      cfg.norm_stride = 1 << 20;
      return solver::time_step_solve(u0b, nullptr, cfg).snapshots.back();
    };
    const VectorField3 ref = run(0.00125);
    const double e1 = rel_l3_diff(run(0.02), ref);
    const double e2 = rel_l3_diff(run(0.01), ref);
    const double order = std::log2(e1 / e2);
    c.require(order >= 1.9, fmt("etd2_order", order));
  }
  {
    const VectorField3 tiny = experiment::make_bump_data(
        g, 1.0, 1e-6, lorentz::LorentzIndex::pq(3.0, 3.0), 1012);
    solver::SolverConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 0.5;
    cfg.snapshot_stride = 0;
    cfg.norm_stride = 1 << 20;
    const auto traj = solver::time_step_solve(tiny, nullptr, cfg);
    const VectorField3 want = solver::caloric(traj.snapshots.front(), 0.5);
    const double diff = rel_l3_diff(traj.snapshots.back(), want);
    c.require(diff <= 0.01, fmt("linear_regime", diff));
  }
}

void criterion9_stability(Criterion& c) {
  experiment::ExperimentConfig cfg;
  cfg.scenario = "stability";
  cfg.n = 64;
  cfg.box_len = 16.0;
  cfg.landau_background = true;
  cfg.landau_a = 8.0;
  cfg.landau_r_cut = 0.5;
  cfg.data_kind = "bump";
  cfg.bump_width = 1.0;
  cfg.data_norm = 0.08;
  cfg.solver.dt = 0.02;
  cfg.solver.t_end = 20.0;
  cfg.solver.q = 4.0;
  cfg.solver.snapshot_stride = 250;
  cfg.solver.norm_stride = 10;
  cfg.eps1 = kEps1;
  cfg.eps2 = kEps2;
  cfg.use_halved_gates = true;
  cfg.decay_target = 0.5;
  cfg.out_dir = "acceptance_out/stability";
  cfg.seed = 9;

  const auto r = experiment::run_stability(cfg);
  const auto j = nlohmann::json::parse(r.summary_json);
  c.require(r.exit_code == 0, "exit=" + std::to_string(r.exit_code));
  if (j.contains("series")) {
    const double l3r = j["series"]["L3_ratio"].get<double>();
    const double l3qr = j["series"]["L3q_ratio"].get<double>();
    const double C = j["series"]["uniform_bound_C"].get<double>();
    c.require(l3r <= 0.5, fmt("L3_ratio", l3r) + " target 0.5");
    c.require(l3qr <= 1.0, fmt("L34_ratio", l3qr) + " trending down");
    c.require(std::isfinite(C), fmt("uniform_C", C));
  }
}

void criterion10_counterexample(Criterion& c) {
  experiment::ExperimentConfig cfg;
  cfg.scenario = "counterexample";
  cfg.n = 128;
  cfg.box_len = 64.0;
  cfg.landau_background = true;
  cfg.landau_a = 8.0;
  cfg.landau_r_cut = 1.0;
  cfg.data_kind = "dss";
  cfg.dss_lambda = 2.0;
  cfg.data_norm = 0.1;
  cfg.bump_width = 2.0;
  cfg.t0 = 1.0;
  cfg.solver.dt = 0.05;
  cfg.solver.q = 3.0;
  cfg.solver.snapshot_stride = 0;
  cfg.solver.norm_stride = 1;
  cfg.out_dir = "acceptance_out/counterexample";
  cfg.seed = 10;

  const auto r = experiment::run_counterexample(cfg);
  const auto j = nlohmann::json::parse(r.summary_json);
  c.require(j["annulus_both_hold"].get<bool>(), "annulus inequalities (3 and 8/3)");
  c.require(j["dss_relation_worst"].get<double>() <= 1e-6,
            fmt("dss_relation", j["dss_relation_worst"].get<double>()));
  const double r1 = j["r1"].get<double>();
  const double mr = j["min_weak_ratio"].get<double>();
  const double cf = j["control_final_weak_ratio"].get<double>();
  c.require(r1 >= 0.75 && r1 <= 1.25, fmt("r1", r1) + " in [0.75,1.25]");
  c.require(mr >= 0.5, fmt("min_ratio", mr) + " >= 0.5");
  c.require(cf < 0.5, fmt("control_final", cf) + " < 0.5");
}

void criterion11_caloric_dichotomy(Criterion& c) {
  {
    const Grid g = build_grid(64, 16.0);
    const VectorField3 u0 = experiment::make_bump_data(
        g, 1.0, 1.0, lorentz::LorentzIndex::pq(3.0, 3.0), 1013);
    std::vector<double> ts;
    for (double t = 1.0; t >= 1e-4; t *= 0.4) ts.push_back(t);
    const auto rep =
        solver::caloric_convergence_report(u0, lorentz::LorentzIndex::pq(3.0, 3.0), ts);
    c.require(rep.final_over_max <= 0.05, fmt("smooth_final_over_max", rep.final_over_max));
  }
  {
    const Grid g = build_grid(128, 64.0);
    dss::DssParams p;
    p.lambda = 2.0;
    p.amplitude = 1.0;
    p.k_min = 1;
    p.k_max = 4;
    const auto datum = dss::make_dss_data(g, p);
    std::vector<double> ts;
    for (double t = 16.0; t >= 0.25; t *= 0.5) ts.push_back(t);
    const auto rep = solver::caloric_convergence_report(
        datum.field, lorentz::LorentzIndex::weak(3.0), ts);
    c.require(rep.min_over_u0_norm >= 0.3,
              fmt("dss_plateau_floor", rep.min_over_u0_norm) + " >= 0.3");
  }
}

void criterion12_energy(Criterion& c) {
  const Grid g = build_grid(32, 8.0);
  {
    const VectorField3 u0 = experiment::make_bump_data(
        g, 1.0, 1e-7, lorentz::LorentzIndex::pq(3.0, 3.0), 1014);
    solver::SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.256;
    cfg.snapshot_stride = 0;
    cfg.norm_stride = 1 << 20;
    const auto traj = solver::time_step_solve(u0, nullptr, cfg);
    const auto rep = solver::energy_monitor(traj, nullptr);
    c.require(rep.max_rel_residual <= 1e-6, fmt("equality_residual", rep.max_rel_residual));
  }
  {
    const auto bg = landau::landau_background(g, {8.0, {0, 0, 1}}, 0.5);
    const VectorField3 u0 = experiment::make_bump_data(
        g, 1.0, 0.05, lorentz::LorentzIndex::pq(3.0, 3.0), 1015);
    solver::SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.256;
    cfg.snapshot_stride = 0;
    cfg.norm_stride = 1 << 20;
    const auto traj = solver::time_step_solve(u0, &bg.field, cfg);
    const auto rep = solver::energy_monitor(traj, &bg.field);
    c.require(rep.ak_below_one, fmt("AK", rep.AK) + " < 1");
    c.require(rep.inequality_holds, fmt("worst_pair_slack", rep.worst_pair_slack) +
                                        " <= 1e-6");
  }
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  run(1, "lorentz-identity", criterion1_lorentz_identity);
  run(2, "indicator-closed-form", criterion2_indicator);
  run(3, "weak-norm-inverse-x", criterion3_weak_norm_inverse);
  run(4, "spectral-exactness", criterion4_spectral_exactness);
  run(5, "heat-oseen-exponents", criterion5_exponents);
  run(6, "landau-validation", criterion6_landau);
  run(7, "fixed-point", criterion7_fixed_point);
  run(8, "solver-consistency", criterion8_solver_consistency);
  run(9, "stability-decay", criterion9_stability);
  run(10, "dss-counterexample", criterion10_counterexample);
  run(11, "caloric-dichotomy", criterion11_caloric_dichotomy);
  run(12, "energy-monitor", criterion12_energy);
  std::printf("SUMMARY: %d/12 passed\n", 12 - failures);
  return failures;
}
