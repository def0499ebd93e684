#include "pns/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "pns/dss.hpp"
#include "pns/fixed_point.hpp"
#include "pns/inequality.hpp"
#include "pns/lorentz.hpp"
#include "pns/profiles.hpp"
#include "pns/snapshot.hpp"
#include "pns/spectral.hpp"

#include "json.hpp"

namespace pns::experiment {

using nlohmann::ordered_json;

namespace {

void write_text(const std::string& dir, const std::string& name, const std::string& text,
                RunResult& result) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/" + name;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
  result.written_files.push_back(path);
}

solver::Scheme parse_scheme(const std::string& s) {
  if (s == "etd1") return solver::Scheme::etd1;
  if (s == "etd2") return solver::Scheme::etd2;
  throw std::invalid_argument("config: unknown scheme '" + s + "'");
}

lorentz::LorentzIndex l3q_index(double q) {
  return std::isfinite(q) ? lorentz::LorentzIndex::pq(3.0, q)
                          : lorentz::LorentzIndex::weak(3.0);
}

/// Largest shell range the grid can resolve: lambda^k_min >= 4h and
/// lambda^(k_max+1) <= L/2.
void derive_shells_impl(double lambda, const Grid& g, int& k_min, int& k_max) {
  const double ll = std::log(lambda);
  k_min = static_cast<int>(std::ceil(std::log(4.0 * g.spacing) / ll - 1e-9));
  k_max = static_cast<int>(std::floor(std::log(0.5 * g.box_len) / ll + 1e-9)) - 1;
}

void derive_shells(const ExperimentConfig& cfg, const Grid& g, int& k_min, int& k_max) {
  derive_shells_impl(cfg.dss_lambda, g, k_min, k_max);
  if (cfg.dss_k_min != 9999) k_min = cfg.dss_k_min;
  if (cfg.dss_k_max != 9999) k_max = cfg.dss_k_max;
}

VectorField3 load_or_make_data(const ExperimentConfig& cfg, const Grid& grid,
                               const lorentz::LorentzIndex& idx) {
  if (cfg.data_kind == "zero") return VectorField3(grid);
  if (cfg.data_kind == "snapshot") {
    VectorField3 f = read_snapshot(cfg.snapshot_path);
    check_same_grid(f.grid, grid);
    return f;
  }
  if (cfg.data_kind == "bump")
    return make_bump_data(grid, cfg.bump_width, cfg.data_norm, idx, cfg.seed);
  if (cfg.data_kind == "dss") {
    dss::DssParams p;
    p.lambda = cfg.dss_lambda;
    p.amplitude = cfg.data_norm;
    derive_shells(cfg, grid, p.k_min, p.k_max);
    return dss::make_dss_data(grid, p).field;
  }
  throw std::invalid_argument("config: unknown data kind '" + cfg.data_kind + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::from(const config::Config& c) {
  ExperimentConfig e;
  e.scenario = c.get_string("scenario", e.scenario);
  e.n = c.get_int("grid.n", e.n);
  e.box_len = c.get_double("grid.box_len", e.box_len);

  const std::string bg = c.get_string("background", "none");
  if (bg == "landau")
    e.landau_background = true;
  else if (bg != "none")
    throw std::invalid_argument("config: background must be 'landau' or 'none'");
  e.landau_a = c.get_double("landau.a", e.landau_a);
  e.landau_r_cut = c.get_double("landau.r_cut", e.landau_r_cut);
  e.landau_corrupt = c.get_bool("landau.corrupt", false);

  e.data_kind = c.get_string("data.kind", e.data_kind);
  e.data_norm = c.get_double("data.norm", e.data_norm);
  e.bump_width = c.get_double("data.bump_width", e.bump_width);
  e.snapshot_path = c.get_string("data.snapshot", e.snapshot_path);
  e.dss_lambda = c.get_double("data.lambda", e.dss_lambda);
  e.dss_k_min = c.get_int("data.k_min", e.dss_k_min);
  e.dss_k_max = c.get_int("data.k_max", e.dss_k_max);

  e.solver.dt = c.get_double("solver.dt", e.solver.dt);
  e.solver.t_end = c.get_double("solver.t_end", e.solver.t_end);
  e.solver.scheme = parse_scheme(c.get_string("solver.scheme", "etd2"));
  e.solver.picard_iters = c.get_int("solver.picard_iters", e.solver.picard_iters);
  e.solver.delta_split = c.get_double("solver.delta", e.solver.delta_split);
  e.solver.snapshot_stride = c.get_int("solver.snapshot_stride", e.solver.snapshot_stride);
  e.solver.norm_stride = c.get_int("solver.norm_stride", e.solver.norm_stride);
  e.solver.q = c.get_double("solver.q", e.solver.q);
  e.t0 = c.get_double("solver.t0", e.t0);

  e.eps1 = c.get_double("thresholds.eps1", e.eps1);
  e.eps2 = c.get_double("thresholds.eps2", e.eps2);
  e.use_halved_gates = c.get_bool("thresholds.use_halved", e.use_halved_gates);
  e.decay_target = c.get_double("thresholds.decay_target", e.decay_target);

  e.out_dir = c.get_string("out", e.out_dir);
  e.seed = c.get_u64("seed", e.seed);
  e.threads = c.get_int("threads", e.threads);
  return e;
}

VectorField3 make_bump_data(const Grid& grid, double width, double target_norm,
                            const lorentz::LorentzIndex& idx, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec3 dir = {0.0, 0.0, 0.0};
  double n2 = 0.0;
  do {
    dir = {2.0 * unif(rng) - 1.0, 2.0 * unif(rng) - 1.0, 2.0 * unif(rng) - 1.0};
    n2 = dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2];
  } while (n2 > 1.0 || n2 < 0.01);
  for (auto& d : dir) d /= std::sqrt(n2);

  // curl of exp(-rho^2/(2 w^2)) dir: divergence free, mean zero, localized.
  const double w2 = width * width;
  VectorField3 u = sample_field(grid, [&](double x, double y, double z) -> Vec3 {
    const double rho2 = x * x + y * y + z * z;
    const double g = -std::exp(-0.5 * rho2 / w2) / w2;  // f'(rho)/rho
    return {g * (y * dir[2] - z * dir[1]), g * (z * dir[0] - x * dir[2]),
            g * (x * dir[1] - y * dir[0])};
  });
  if (target_norm <= 0.0) return VectorField3(grid);
  const double nrm = lorentz::lorentz_quasinorm(u, idx);
  return scaled(u, target_norm / nrm);
}

namespace {

struct Gates {
  double eps1_eff = 0.0;
  double eps2_eff = 0.0;
  bool halved = false;
};

Gates effective_gates(const ExperimentConfig& cfg) {
  Gates g;
  g.halved = cfg.use_halved_gates;
  g.eps1_eff = g.halved ? 0.5 * cfg.eps1 : cfg.eps1;
  g.eps2_eff = g.halved ? 0.5 * cfg.eps2 : cfg.eps2;
  return g;
}

ordered_json norm_series_summary(const solver::SolutionTrajectory& traj) {
  ordered_json j;
  if (traj.norms.empty()) return j;
  const auto& first = traj.norms.front();
  const auto& last = traj.norms.back();
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 0.0; };
  j["t_end"] = last.t;
  j["L3_initial"] = first.l3;
  j["L3_final"] = last.l3;
  j["L3_ratio"] = ratio(last.l3, first.l3);
  j["L3q_initial"] = first.l3q;
  j["L3q_final"] = last.l3q;
  j["L3q_ratio"] = ratio(last.l3q, first.l3q);
  j["L3winf_ratio"] = ratio(last.l3winf, first.l3winf);
  double c_uniform = 0.0, max_l3q = 0.0;
  for (const auto& r : traj.norms) max_l3q = std::max(max_l3q, r.l3q);
  c_uniform = ratio(max_l3q, first.l3q);
  j["uniform_bound_C"] = c_uniform;
  j["max_cfl"] = traj.max_cfl;
  j["status"] = traj.status == solver::SolutionTrajectory::Status::completed
                    ? "completed"
                    : "aborted_nan";
  return j;
}

}  // namespace

RunResult run_stability(const ExperimentConfig& cfg) {
  RunResult result;
  const Grid grid = build_grid(cfg.n, cfg.box_len);
  const auto idx = l3q_index(cfg.solver.q);
  const Gates gates = effective_gates(cfg);

  ordered_json summary;
  summary["scenario"] = "stability";
  summary["seed"] = cfg.seed;

  double A = 0.0;
  landau::MollifiedBackground bg;
  if (cfg.landau_background) {
    bg = landau::landau_background(grid, {cfg.landau_a, {0, 0, 1}}, cfg.landau_r_cut);
    A = bg.weak_l3_norm;
  }
  VectorField3 u0 = load_or_make_data(cfg, grid, idx);
  const double u0_norm = lorentz::lorentz_quasinorm(u0, idx);

  summary["measured_A"] = A;
  summary["measured_u0_norm"] = u0_norm;
  summary["gate_eps1"] = gates.eps1_eff;
  summary["gate_eps2"] = gates.eps2_eff;
  summary["gate_halved"] = gates.halved;
  summary["gate_eps1_full"] = cfg.eps1;
  summary["gate_eps2_full"] = cfg.eps2;

  if (A >= gates.eps1_eff || u0_norm >= gates.eps2_eff) {
    summary["refused"] = true;
    summary["reason"] = "smallness gate: ||U||_{3,inf} = " + std::to_string(A) +
                        " vs eps1 = " + std::to_string(gates.eps1_eff) +
                        ", ||u0||_{3,q} = " + std::to_string(u0_norm) +
                        " vs eps2 = " + std::to_string(gates.eps2_eff);
    result.exit_code = kExitRefusal;
    result.summary_json = summary.dump(2);
    write_text(cfg.out_dir, "summary.json", result.summary_json, result);
    return result;
  }
  summary["refused"] = false;

  const auto traj =
      solver::time_step_solve(u0, cfg.landau_background ? &bg.field : nullptr, cfg.solver);
  write_text(cfg.out_dir, "norms.csv", traj.norms_csv(), result);

  summary["series"] = norm_series_summary(traj);
  const bool zero_data = u0_norm == 0.0;
  summary["degenerate_zero_data"] = zero_data;

  const auto kato = solver::kato_norms(traj, cfg.solver.kato_p_list, cfg.solver.q);
  ordered_json jk;
  for (const auto& [p, v] : kato.per_p) jk["K" + std::to_string(p)] = v;
  jk["K"] = kato.K;
  jk["Y"] = kato.Y;
  jk["X"] = kato.X;
  summary["kato"] = jk;

  const auto energy =
      solver::energy_monitor(traj, cfg.landau_background ? &bg.field : nullptr);
  ordered_json je;
  je["max_rel_residual"] = energy.max_rel_residual;
  je["A"] = energy.A;
  je["K_hat"] = energy.K_hat;
  je["AK"] = energy.AK;
  je["AK_below_one"] = energy.ak_below_one;
  je["inequality_holds"] = energy.inequality_holds;
  je["worst_pair_slack"] = energy.worst_pair_slack;
  summary["energy"] = je;

  const bool aborted = traj.status != solver::SolutionTrajectory::Status::completed;
  const double l3_ratio = summary["series"].value("L3_ratio", 1.0);
  const double l3q_ratio = summary["series"].value("L3q_ratio", 1.0);
  const bool pass =
      !aborted && (zero_data || (l3_ratio <= cfg.decay_target && l3q_ratio <= 1.0));
  summary["decay_target"] = cfg.decay_target;
  summary["pass"] = pass;
  result.exit_code = pass ? kExitPass : kExitFail;
  result.summary_json = summary.dump(2);
  write_text(cfg.out_dir, "summary.json", result.summary_json, result);
  return result;
}

RunResult run_counterexample(const ExperimentConfig& cfg) {
  RunResult result;
  const Grid grid = build_grid(cfg.n, cfg.box_len);
  ordered_json summary;
  summary["scenario"] = "counterexample";
  summary["seed"] = cfg.seed;

  if (cfg.data_norm <= 0.0) {
    summary["degenerate_zero_data"] = true;
    summary["pass"] = true;
    result.summary_json = summary.dump(2);
    write_text(cfg.out_dir, "summary.json", result.summary_json, result);
    return result;
  }

  dss::DssParams params;
  params.lambda = cfg.dss_lambda;
  params.amplitude = cfg.data_norm;
  {
    int kmin = 0, kmax = 0;
    derive_shells_impl(params.lambda, grid, kmin, kmax);
    if (cfg.dss_k_min != 9999) kmin = cfg.dss_k_min;
    if (cfg.dss_k_max != 9999) kmax = cfg.dss_k_max;
    params.k_min = kmin;
    params.k_max = kmax;
  }
  summary["k_min"] = params.k_min;
  summary["k_max"] = params.k_max;

  dss::DssField datum;
  try {
    datum = dss::make_dss_data(grid, params);
  } catch (const std::invalid_argument& e) {
    summary["refused"] = true;
    summary["reason"] = e.what();
    result.exit_code = kExitRefusal;
    result.summary_json = summary.dump(2);
    write_text(cfg.out_dir, "summary.json", result.summary_json, result);
    return result;
  }
  summary["refused"] = false;
  summary["dss_weak_norm"] = datum.weak_l3_norm;
  summary["dss_equivalence_lower"] = datum.equivalence_lower;
  summary["dss_equivalence_upper"] = datum.equivalence_upper;

  // Data-level DSS relation, via the analytic extension.
  double relation_worst = 0.0;
  {
    std::mt19937_64 rng(cfg.seed ^ 0x5f1e);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double scale = datum.weak_l3_norm;
    for (int i = 0; i < 500; ++i) {
      double dx, dy, dz, n2;
      do {
        dx = 2.0 * unif(rng) - 1.0;
        dy = 2.0 * unif(rng) - 1.0;
        dz = 2.0 * unif(rng) - 1.0;
        n2 = dx * dx + dy * dy + dz * dz;
      } while (n2 > 1.0 || n2 < 1e-4);
      const int k = params.k_min +
                    static_cast<int>(unif(rng) * (params.k_max - params.k_min));
      const double rho = std::pow(params.lambda, k) * (1.0 + (params.lambda - 1.0) * unif(rng));
      const double sc = rho / std::sqrt(n2);
      const Vec3 x = {dx * sc, dy * sc, dz * sc};
      const Vec3 lx = {params.lambda * x[0], params.lambda * x[1], params.lambda * x[2]};
      const Vec3 ua = dss::dss_extension_value(x, params);
      const Vec3 ub = dss::dss_extension_value(lx, params);
      for (int c = 0; c < 3; ++c)
        relation_worst =
            std::max(relation_worst, std::abs(params.lambda * ub[c] - ua[c]) / scale);
    }
  }
  summary["dss_relation_worst"] = relation_worst;

  const auto annulus = dss::annulus_inequalities(datum, params.lambda);
  write_text(cfg.out_dir, "dss_inequalities.json", annulus.to_json(), result);
  summary["annulus_both_hold"] = annulus.both_hold();

  landau::MollifiedBackground bg;
  const VectorField3* U = nullptr;
  if (cfg.landau_background) {
    bg = landau::landau_background(grid, {cfg.landau_a, {0, 0, 1}}, cfg.landau_r_cut);
    U = &bg.field;
    summary["measured_A"] = bg.weak_l3_norm;
  }

  // One lambda^2 cycle from t0, time grid snapped onto dt.
  solver::SolverConfig sc = cfg.solver;
  const int m0 = std::max(1, static_cast<int>(std::lround(cfg.t0 / sc.dt)));
  sc.dt = cfg.t0 / m0;
  const double t_cycle = params.lambda * params.lambda * cfg.t0;
  sc.t_end = sc.dt * std::ceil(t_cycle / sc.dt - 1e-9);
  summary["t0"] = cfg.t0;
  summary["t_end"] = sc.t_end;

  const auto traj = solver::time_step_solve(datum.field, U, sc);
  write_text(cfg.out_dir, "norms_dss.csv", traj.norms_csv(), result);

  const auto rescaled = dss::rescaled_norm_series(traj, params.lambda, cfg.t0);
  write_text(cfg.out_dir, "rescaled.csv", rescaled.to_csv(), result);
  double r1 = 0.0;
  for (const auto& row : rescaled.rows)
    if (row.k == 1) r1 = row.ratio;
  summary["r1"] = r1;

  double min_ratio = 1e300;
  const double w0 = traj.norms.front().l3winf;
  for (const auto& row : traj.norms)
    if (w0 > 0.0) min_ratio = std::min(min_ratio, row.l3winf / w0);
  summary["min_weak_ratio"] = min_ratio;

  // Matched smooth control: equal weak-L3 size, same solver and background.
  VectorField3 control = make_bump_data(grid, cfg.bump_width, datum.weak_l3_norm,
                                        lorentz::LorentzIndex::weak(3.0), cfg.seed + 17);
  const auto traj_ctrl = solver::time_step_solve(control, U, sc);
  write_text(cfg.out_dir, "norms_control.csv", traj_ctrl.norms_csv(), result);
  const double ctrl_final = traj_ctrl.norms.back().l3winf / traj_ctrl.norms.front().l3winf;
  summary["control_final_weak_ratio"] = ctrl_final;

  const bool aborted = traj.status != solver::SolutionTrajectory::Status::completed ||
                       traj_ctrl.status != solver::SolutionTrajectory::Status::completed;
  const bool pass = !aborted && annulus.both_hold() && relation_worst <= 1e-6 &&
                    r1 >= 0.75 && r1 <= 1.25 && min_ratio >= 0.5 && ctrl_final < 0.5;
  summary["pass"] = pass;
  result.exit_code = pass ? kExitPass : kExitFail;
  result.summary_json = summary.dump(2);
  write_text(cfg.out_dir, "summary.json", result.summary_json, result);
  return result;
}

// ---------------------------------------------------------------------------
// verify suite
// ---------------------------------------------------------------------------

namespace {

struct VerifyItem {
  std::string suite;
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
};

VectorField3 random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorField3 u(g);
  for (int c = 0; c < 3; ++c)
    for (auto& v : u.comp[c]) v = gauss(rng);
  return u;
}

void lorentz_suite(std::vector<VerifyItem>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x101);
  const Grid g = build_grid(16, 8.0);

  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const VectorField3 f = random_field(g, rng);
    const auto summary = lorentz::distribution_summary(f);
    for (double p : {2.0, 2.5, 3.0, 4.0}) {
      const double a = lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::pq(p, p));
      const double b = lorentz::lp_norm(f, p);
      worst = std::max(worst, std::abs(a - b) / b);
    }
  }
  items.push_back({"lorentz", "Lpp_equals_Lp", worst <= 1e-10, worst, 1e-10});

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  worst = 0.0;
  for (int s = 0; s < 5; ++s) {
    ScalarField ind(g);
    std::size_t m = 0;
    for (auto& v : ind.values)
      if (unif(rng) < 0.1) {
        v = 1.0;
        ++m;
      }
    if (m == 0) {
      ind.values[0] = 1.0;
      m = 1;
    }
    const double meas = static_cast<double>(m) * g.cell_measure;
    for (double p : {2.0, 3.0}) {
      for (double q : {3.0, 8.0}) {
        const double got = lorentz::lorentz_quasinorm(ind, lorentz::LorentzIndex::pq(p, q));
        const double want = std::pow(p / q, 1.0 / q) * std::pow(meas, 1.0 / p);
        worst = std::max(worst, std::abs(got - want) / want);
      }
      const double gotw = lorentz::lorentz_quasinorm(ind, lorentz::LorentzIndex::weak(p));
      worst = std::max(worst, std::abs(gotw - std::pow(meas, 1.0 / p)) / std::pow(meas, 1.0 / p));
    }
  }
  items.push_back({"lorentz", "indicator_closed_form", worst <= 1e-12, worst, 1e-12});

  // Weak-norm domination by the (p,q) quasinorm.
  worst = 0.0;
  for (int s = 0; s < 10; ++s) {
    const VectorField3 f = random_field(g, rng);
    const auto summary = lorentz::distribution_summary(f);
    for (double q : {3.0, 4.0, 8.0}) {
      const double lhs = lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::weak(3.0));
      const double rhs = std::pow(q / 3.0, 1.0 / q) *
                         lorentz::lorentz_quasinorm(summary, lorentz::LorentzIndex::pq(3.0, q));
      worst = std::max(worst, lhs / rhs);
    }
  }
  items.push_back({"lorentz", "weak_domination", worst <= 1.0 + 1e-12, worst, 1.0});

  // Scale invariance of ||lambda f(lambda .)||_{3,q} under grid rescaling.
  worst = 0.0;
  {
    const VectorField3 f = random_field(g, rng);
    for (double lam : {2.0, 0.5}) {
      Grid g2 = build_grid(g.n, g.box_len / lam);
      VectorField3 f2(g2);
      for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < f2.comp[c].size(); ++i)
          f2.comp[c][i] = lam * f.comp[c][i];
      for (double q : {3.0, 5.0}) {
        const double a = lorentz::lorentz_quasinorm(f, lorentz::LorentzIndex::pq(3.0, q));
        const double b = lorentz::lorentz_quasinorm(f2, lorentz::LorentzIndex::pq(3.0, q));
        worst = std::max(worst, std::abs(a - b) / a);
      }
    }
  }
  items.push_back({"lorentz", "scaling_invariance", worst <= 1e-10, worst, 1e-10});

  // level_split bounds on a mollified jet.
  {
    const Grid g32 = build_grid(32, 16.0);
    const auto bg = landau::landau_background(g32, {4.0, {0, 0, 1}}, 1.0);
    const auto sp = lorentz::level_split(bg.field, 1.0, 1.0);
    bool exact = true;
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < sp.low.comp[c].size(); ++i)
        if (sp.low.comp[c][i] + sp.high.comp[c][i] != bg.field.comp[c][i]) exact = false;
    const bool pass = exact && sp.sup_bound_holds && sp.support_bound_holds;
    const double slack = sp.support_measure_bound > 0.0
                             ? sp.high_support_measure / sp.support_measure_bound
                             : 0.0;
    items.push_back({"lorentz", "level_split_bounds", pass, slack, 1.0});
  }

  // Weak-L3 norm of the capped 1/|x| profile (coarse check; the acceptance
  // suite runs the finer one).
  {
    const Grid g64 = build_grid(64, 16.0);
    const double cap = 8.0 * g64.spacing;
    const ScalarField f = sample_scalar(
        g64,
        [&](double x, double y, double z) {
          const double rho = std::sqrt(x * x + y * y + z * z);
          return std::min(1.0 / std::max(rho, 1e-12), 1.0 / cap);
        },
        {0.5 * g64.spacing, 0.5 * g64.spacing, 0.5 * g64.spacing});
    const double got = lorentz::lorentz_quasinorm(f, lorentz::LorentzIndex::weak(3.0));
    const double want = std::cbrt(4.0 * std::numbers::pi / 3.0);
    const double rel = std::abs(got - want) / want;
    items.push_back({"lorentz", "inverse_norm_weakL3", rel <= 0.05, rel, 0.05});
  }
}

void spectral_suite(std::vector<VerifyItem>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x202);
  const Grid g = build_grid(16, 8.0);
  const VectorField3 f = random_field(g, rng);

  {
    const VectorField3 f2 = spectral::inverse(spectral::forward(f));
    double num = 0.0, den = 0.0;
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < f.comp[c].size(); ++i) {
        num = std::max(num, std::abs(f2.comp[c][i] - f.comp[c][i]));
        den = std::max(den, std::abs(f.comp[c][i]));
      }
    const double rel = num / den;
    items.push_back({"spectral", "roundtrip", rel <= 1e-12, rel, 1e-12});
  }

  {
    const auto fh = spectral::forward(f);
    double phys = 0.0;
    for (int c = 0; c < 3; ++c)
      for (double v : f.comp[c]) phys += v * v;
    phys *= g.cell_measure;
    const double spec = spectral::l2_norm(fh);
    const double rel = std::abs(std::sqrt(phys) - spec) / spec;
    items.push_back({"spectral", "parseval", rel <= 1e-10, rel, 1e-10});
  }

  {
    auto fh = spectral::forward(f);
    spectral::leray_project(fh);
    const double div1 = spectral::max_divergence(fh) / spectral::max_mode_norm(fh);
    auto fh2 = fh;
    spectral::leray_project(fh2);
    const double idem = spectral::max_mode_norm(spectral::sub(fh2, fh)) /
                        spectral::max_mode_norm(fh);
    const double worst = std::max(div1, idem);
    items.push_back({"spectral", "leray_divfree_idempotent", worst <= 1e-12, worst, 1e-12});

    // Gradient annihilation: P grad(phi) = 0.
    ScalarField phi = sample_scalar(g, [&](double x, double y, double z) {
      return std::sin(2.0 * std::numbers::pi * x / g.box_len) *
             std::cos(4.0 * std::numbers::pi * y / g.box_len) *
             std::cos(2.0 * std::numbers::pi * z / g.box_len);
    });
    auto ph = spectral::forward_scalar(phi);
    spectral::SpectralVectorField3 gradp(g);
    const double k0 = 2.0 * std::numbers::pi / g.box_len;
    const int n = g.n;
    const int nzh = n / 2 + 1;
    std::size_t idx = 0;
    for (int ix = 0; ix < n; ++ix) {
      const double kx = k0 * spectral::signed_freq(ix, n);
      for (int iy = 0; iy < n; ++iy) {
        const double ky = k0 * spectral::signed_freq(iy, n);
        for (int iz = 0; iz < nzh; ++iz, ++idx) {
          const spectral::Complex i(0, 1);
          gradp.comp[0][idx] = i * kx * ph[idx];
          gradp.comp[1][idx] = i * ky * ph[idx];
          gradp.comp[2][idx] = i * (k0 * iz) * ph[idx];
        }
      }
    }
    const double before = spectral::max_mode_norm(gradp);
    spectral::leray_project(gradp);
    const double after = spectral::max_mode_norm(gradp) / before;
    items.push_back({"spectral", "gradient_annihilation", after <= 1e-12, after, 1e-12});
  }

  {
    auto fh = spectral::forward(f);
    auto a = spectral::heat_propagated(spectral::heat_propagated(fh, 0.3), 0.7);
    auto b = spectral::heat_propagated(fh, 1.0);
    const double rel = spectral::max_mode_norm(spectral::sub(a, b)) /
                       spectral::max_mode_norm(b);
    items.push_back({"spectral", "heat_semigroup", rel <= 1e-13, rel, 1e-13});
  }

  {
    // Two-mode advection identity on n=16.
    const double k0 = 2.0 * std::numbers::pi / g.box_len;
    const VectorField3 u = sample_field(g, [&](double x, double, double) -> Vec3 {
      return {0.0, std::cos(k0 * x), 0.0};
    });
    const VectorField3 v = sample_field(g, [&](double, double y, double) -> Vec3 {
      return {0.0, 0.0, std::cos(2.0 * k0 * y)};
    });
    // d_y (u_y v_z) = d_y(cos(k0 x) cos(2k0 y)) -> z-component
    const VectorField3 adv = spectral::advection_divergence(u, v);
    const VectorField3 want = sample_field(g, [&](double x, double y, double) -> Vec3 {
      return {0.0, 0.0, -2.0 * k0 * std::cos(k0 * x) * std::sin(2.0 * k0 * y)};
    });
    double num = 0.0, den = 0.0;
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < adv.comp[c].size(); ++i) {
        num = std::max(num, std::abs(adv.comp[c][i] - want.comp[c][i]));
        den = std::max(den, std::abs(want.comp[c][i]));
      }
    const double rel = num / den;
    items.push_back({"spectral", "advection_two_mode", rel <= 1e-12, rel, 1e-12});
  }
}

void landau_suite(std::vector<VerifyItem>& items, std::uint64_t seed,
                  landau::FormulaVariant variant) {
  std::mt19937_64 rng(seed ^ 0x303);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const landau::LandauParams params{2.0, {0, 0, 1}};

  {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      Vec3 x;
      double n2;
      do {
        x = {2.0 * unif(rng) - 1.0, 2.0 * unif(rng) - 1.0, 2.0 * unif(rng) - 1.0};
        n2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      } while (n2 < 0.01 || n2 > 1.0);
      for (double lam : {2.0, 0.5, 10.0}) {
        const Vec3 a = landau::landau_velocity({lam * x[0], lam * x[1], lam * x[2]},
                                               params, variant);
        const Vec3 b = landau::landau_velocity(x, params, variant);
        for (int c = 0; c < 3; ++c)
          worst = std::max(worst, std::abs(lam * a[c] - b[c]) /
                                      std::max(1e-12, std::abs(b[c])));
      }
    }
    items.push_back({"landau", "minus_one_homogeneity", worst <= 1e-12, worst, 1e-12});
  }

  {
    const auto probe = landau::divergence_probe(params, 1.0, 3.0, 1e-4, 1000,
                                                seed ^ 0x404, variant);
    items.push_back({"landau", "fd_divergence", probe.max_scaled <= 1e-8,
                     probe.max_scaled, 1e-8});
  }

  {
    const auto rep =
        landau::residual_report(params, 1.0, 3.0, {32, 64}, 12.0, 0.8, variant);
    const double r0 = rep.rows[0].residual;
    const double r1 = rep.rows[1].residual;
    const bool pass = r1 < 0.6 * r0 && r1 < 0.2;
    items.push_back({"landau", "stationary_residual_decreases", pass, r1, 0.2});
  }

  {
    const Grid g = build_grid(32, 16.0);
    double prev = 1e300;
    bool monotone = true;
    double last = 0.0;
    for (double a : {2.0, 4.0, 8.0, 16.0, 32.0}) {
      const auto bg = landau::landau_background(g, {a, {0, 0, 1}}, 1.0, variant);
      if (bg.weak_l3_norm >= prev) monotone = false;
      prev = bg.weak_l3_norm;
      last = bg.weak_l3_norm;
    }
    items.push_back({"landau", "weak_norm_decreasing_in_a", monotone, last, 0.0});
  }
}

void fixedpoint_suite(std::vector<VerifyItem>& items, std::uint64_t seed) {
  using namespace fixedpoint;
  {
    ScalarSpace sp;
    auto B = [](double x, double y) { return x * y; };
    auto [e, trace] = solve_picard(sp, 0.2, B, 1.0 / 16.0, 1.0, 0.2);
    const double want = (-9.0 / 8.0 + std::sqrt(81.0 / 64.0 + 0.8)) / 2.0;
    const double err = std::abs(e - want);
    items.push_back({"fixedpoint", "scalar_quadratic_oracle", err <= 1e-12, err, 1e-12});
    items.push_back({"fixedpoint", "scalar_contraction",
                     trace.max_ratio() <= 7.0 / 8.0 + 1e-9, trace.max_ratio(),
                     7.0 / 8.0 + 1e-9});
  }
  {
    EuclideanSpace sp{8};
    std::mt19937_64 rng(seed ^ 0x505);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> T(8 * 8 * 8);
    double fro = 0.0;
    for (auto& t : T) {
      t = gauss(rng);
      fro += t * t;
    }
    fro = std::sqrt(fro);
    for (auto& t : T) t /= fro;  // ||T||_F = 1 certifies C_B = 1
    auto B = [&T](const std::vector<double>& x, const std::vector<double>& y) {
      std::vector<double> r(8, 0.0);
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
          for (int k = 0; k < 8; ++k) r[i] += T[(i * 8 + j) * 8 + k] * x[j] * y[k];
      return r;
    };
    auto U = sp.scale(1.0 / 32.0, sp.random_unit(rng));
    auto e0 = sp.scale(0.2, sp.random_unit(rng));
    auto [e, trace] = solve_picard(sp, e0, B, U, 1.0, 0.2);
    const bool ball = trace.max_norm() <= 1.5 * 0.2 + 1e-12;
    items.push_back({"fixedpoint", "r8_contraction",
                     trace.max_ratio() <= 7.0 / 8.0 + 1e-9 && ball, trace.max_ratio(),
                     7.0 / 8.0 + 1e-9});
    const auto uniq = uniqueness_probe(sp, e0, B, U, 1.0, 0.2, 5);
    items.push_back({"fixedpoint", "r8_uniqueness", uniq.max_pairwise <= 1e-10,
                     uniq.max_pairwise, 1e-10});
    const double defect = bilinearity_defect(sp, B, 16, seed ^ 0x606);
    items.push_back({"fixedpoint", "bilinearity_probe", defect <= 1e-10, defect, 1e-10});
  }
}

void dss_suite(std::vector<VerifyItem>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x707);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Analytic DSS relation on interior points.
  {
    dss::DssParams p;
    p.lambda = 2.0;
    p.amplitude = 1.0;
    p.k_min = -1;
    p.k_max = 2;
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      double dx, dy, dz, n2;
      do {
        dx = 2.0 * unif(rng) - 1.0;
        dy = 2.0 * unif(rng) - 1.0;
        dz = 2.0 * unif(rng) - 1.0;
        n2 = dx * dx + dy * dy + dz * dz;
      } while (n2 > 1.0 || n2 < 1e-4);
      const int k = p.k_min + static_cast<int>(unif(rng) * (p.k_max - p.k_min));
      const double rho = std::pow(p.lambda, k) * (1.0 + 0.999 * unif(rng));
      const double sc = rho / std::sqrt(n2);
      const Vec3 x = {dx * sc, dy * sc, dz * sc};
      const Vec3 a = dss::dss_extension_value(x, p);
      const Vec3 b =
          dss::dss_extension_value({2.0 * x[0], 2.0 * x[1], 2.0 * x[2]}, p);
      for (int c = 0; c < 3; ++c)
        worst = std::max(worst, std::abs(2.0 * b[c] - a[c]));
    }
    items.push_back({"dss", "analytic_relation", worst <= 1e-6, worst, 1e-6});
  }

  // Annulus inequalities across lambda.
  {
    bool all_hold = true;
    double worst_slack = 0.0;
    for (double lam : {1.5, 2.0, 4.0}) {
      const int n = lam < 2.0 ? 128 : 64;
      const Grid g = build_grid(n, 32.0);
      dss::DssParams p;
      p.lambda = lam;
      p.amplitude = 1.0;
      derive_shells_impl(lam, g, p.k_min, p.k_max);
      const auto field = dss::make_dss_data(g, p);
      const auto rep = dss::annulus_inequalities(field, lam);
      if (!rep.both_hold()) all_hold = false;
      worst_slack = std::max({worst_slack, rep.first.lhs / rep.first.rhs,
                              rep.second.lhs / rep.second.rhs});
    }
    items.push_back({"dss", "annulus_inequalities", all_hold, worst_slack, 1.0});
  }

  // Quasinorm homogeneity in the amplitude.
  {
    const Grid g = build_grid(64, 32.0);
    dss::DssParams p;
    p.lambda = 2.0;
    p.amplitude = 1.0;
    derive_shells_impl(2.0, g, p.k_min, p.k_max);
    const auto f1 = dss::make_dss_data(g, p);
    p.amplitude = 2.0;
    const auto f2 = dss::make_dss_data(g, p);
    const double rel = std::abs(f2.weak_l3_norm - 2.0 * f1.weak_l3_norm) /
                       (2.0 * f1.weak_l3_norm);
    items.push_back({"dss", "amplitude_homogeneity", rel <= 1e-10, rel, 1e-10});
  }
}

void inequality_suite(std::vector<VerifyItem>& items, std::uint64_t seed) {
  const Grid g = build_grid(32, 16.0);
  {
    inequality::OneilParams p;
    p.f_idx = lorentz::LorentzIndex::weak(1.5);
    p.g_idx = lorentz::LorentzIndex::weak(1.5);
    p.out_idx = lorentz::LorentzIndex::weak(3.0);
    const auto table = inequality::oneil_report(g, p, 10, seed ^ 0x808);
    const double mr = table.max_ratio();
    items.push_back({"inequality", "oneil_ratios_finite",
                     std::isfinite(mr) && mr > 0.0, mr, 0.0});
  }
  {
    std::vector<double> ts;
    for (double t = 1e-3; t <= 1e-1 * (1 + 1e-9); t *= std::sqrt(10.0)) ts.push_back(t);
    const auto table = inequality::heat_report(g, 4.0, 4.0,
                                               lorentz::LorentzIndex::pq(4.0, 4.0), 2, ts,
                                               seed ^ 0x909);
    const double slope = std::abs(table.mean_fitted_slope());
    items.push_back({"inequality", "heat_same_p_slope", slope <= 0.05, slope, 0.05});
  }
  {
    bool threw = false;
    try {
      inequality::heat_report(g, 3.0, 4.0, lorentz::LorentzIndex::pq(3.0, 3.0), 1, {0.1},
                              seed);
    } catch (const std::invalid_argument&) {
      threw = true;
    }
    items.push_back({"inequality", "exponent_relation_rejected", threw, threw ? 1.0 : 0.0,
                     1.0});
  }
}

}  // namespace

RunResult run_verify(const ExperimentConfig& cfg) {
  RunResult result;
  std::vector<VerifyItem> items;
  const auto variant = cfg.landau_corrupt ? landau::FormulaVariant::sign_flipped
                                          : landau::FormulaVariant::exact;
  lorentz_suite(items, cfg.seed);
  spectral_suite(items, cfg.seed);
  landau_suite(items, cfg.seed, variant);
  fixedpoint_suite(items, cfg.seed);
  dss_suite(items, cfg.seed);
  inequality_suite(items, cfg.seed);

  ordered_json summary;
  summary["scenario"] = "verify";
  summary["seed"] = cfg.seed;
  summary["landau_corrupt"] = cfg.landau_corrupt;
  ordered_json arr = ordered_json::array();
  bool all = true;
  for (const auto& it : items) {
    ordered_json j;
    j["suite"] = it.suite;
    j["name"] = it.name;
    j["pass"] = it.pass;
    j["measured"] = it.measured;
    j["threshold"] = it.threshold;
    arr.push_back(j);
    all = all && it.pass;
  }
  summary["items"] = arr;
  summary["all_pass"] = all;
  result.exit_code = all ? kExitPass : kExitFail;
  result.summary_json = summary.dump(2);
  write_text(cfg.out_dir, "verify.json", result.summary_json, result);
  return result;
}

RunResult run_simulate(const ExperimentConfig& cfg) {
  RunResult result;
  const Grid grid = build_grid(cfg.n, cfg.box_len);
  const auto idx = l3q_index(cfg.solver.q);

  landau::MollifiedBackground bg;
  const VectorField3* U = nullptr;
  if (cfg.landau_background) {
    bg = landau::landau_background(grid, {cfg.landau_a, {0, 0, 1}}, cfg.landau_r_cut);
    U = &bg.field;
  }
  const VectorField3 u0 = load_or_make_data(cfg, grid, idx);
  const auto traj = solver::time_step_solve(u0, U, cfg.solver);
  write_text(cfg.out_dir, "norms.csv", traj.norms_csv(), result);
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%05zu.lnsf", i);
    std::filesystem::create_directories(cfg.out_dir);
    write_snapshot(traj.snapshots[i], cfg.out_dir + "/" + name);
    result.written_files.push_back(cfg.out_dir + "/" + name);
  }

  ordered_json summary;
  summary["scenario"] = "simulate";
  summary["seed"] = cfg.seed;
  summary["series"] = norm_series_summary(traj);
  const bool ok = traj.status == solver::SolutionTrajectory::Status::completed;
  summary["pass"] = ok;
  result.exit_code = ok ? kExitPass : kExitFail;
  result.summary_json = summary.dump(2);
  write_text(cfg.out_dir, "summary.json", result.summary_json, result);
  return result;
}

RunResult run_fixedpoint_demo(const ExperimentConfig& cfg) {
  using namespace fixedpoint;
  RunResult result;
  ordered_json summary;
  summary["scenario"] = "fixedpoint_demo";

  ScalarSpace sp;
  auto B = [](double x, double y) { return x * y; };
  auto [e, trace] = solve_picard(sp, 0.2, B, 1.0 / 16.0, 1.0, 0.2);
  write_text(cfg.out_dir, "picard_scalar.csv", trace.to_csv(), result);
  summary["scalar_fixed_point"] = e;
  summary["scalar_max_ratio"] = trace.max_ratio();

  EuclideanSpace esp{8};
  std::mt19937_64 rng(cfg.seed ^ 0xfeed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> T(8 * 8 * 8);
  double fro = 0.0;
  for (auto& t : T) {
    t = gauss(rng);
    fro += t * t;
  }
  fro = std::sqrt(fro);
  for (auto& t : T) t /= fro;
  auto B8 = [&T](const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> r(8, 0.0);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        for (int k = 0; k < 8; ++k) r[i] += T[(i * 8 + j) * 8 + k] * x[j] * y[k];
    return r;
  };
  auto U = esp.scale(1.0 / 32.0, esp.random_unit(rng));
  auto e0 = esp.scale(0.2, esp.random_unit(rng));
  auto [e8, trace8] = solve_picard(esp, e0, B8, U, 1.0, 0.2);
  (void)e8;
  write_text(cfg.out_dir, "picard_r8.csv", trace8.to_csv(), result);
  const auto uniq = uniqueness_probe(esp, e0, B8, U, 1.0, 0.2, 5);
  summary["r8_max_ratio"] = trace8.max_ratio();
  summary["r8_uniqueness_max_pairwise"] = uniq.max_pairwise;
  summary["r8_uniqueness_radius"] = uniq.radius;
  summary["r8_active_bound"] = uniq.active_bound;
  summary["pass"] = true;
  result.summary_json = summary.dump(2);
  write_text(cfg.out_dir, "summary.json", result.summary_json, result);
  return result;
}

RunResult run_norms(const ExperimentConfig& cfg) {
  RunResult result;
  const Grid grid = build_grid(cfg.n, cfg.box_len);
  const VectorField3 f = load_or_make_data(cfg, grid, l3q_index(cfg.solver.q));

  ordered_json arr = ordered_json::array();
  const auto summary = lorentz::distribution_summary(f);
  auto report_one = [&](const lorentz::LorentzIndex& idx) {
    lorentz::LorentzReport r{idx.p, idx.q, idx.q_inf,
                             lorentz::lorentz_quasinorm(summary, idx),
                             summary.breakpoints()};
    arr.push_back(ordered_json::parse(lorentz::to_json(r)));
  };
  report_one(lorentz::LorentzIndex::pq(2.0, 2.0));
  report_one(lorentz::LorentzIndex::pq(3.0, 3.0));
  report_one(l3q_index(cfg.solver.q));
  report_one(lorentz::LorentzIndex::weak(3.0));

  ordered_json summary_json;
  summary_json["scenario"] = "norms";
  summary_json["reports"] = arr;
  summary_json["pass"] = true;
  result.summary_json = summary_json.dump(2);
  write_text(cfg.out_dir, "norms.json", result.summary_json, result);
  return result;
}

RunResult run_landau_gen(const ExperimentConfig& cfg) {
  RunResult result;
  const Grid grid = build_grid(cfg.n, cfg.box_len);
  const auto bg = landau::landau_background(
      grid, {cfg.landau_a, {0, 0, 1}}, cfg.landau_r_cut,
      cfg.landau_corrupt ? landau::FormulaVariant::sign_flipped
                         : landau::FormulaVariant::exact);
  std::filesystem::create_directories(cfg.out_dir);
  write_snapshot(bg.field, cfg.out_dir + "/landau_background.lnsf");
  result.written_files.push_back(cfg.out_dir + "/landau_background.lnsf");

  ordered_json summary;
  summary["scenario"] = "landau_gen";
  summary["a"] = cfg.landau_a;
  summary["r_cut"] = cfg.landau_r_cut;
  summary["weak_l3_norm"] = bg.weak_l3_norm;
  summary["max_divergence"] = bg.max_divergence;
  summary["projection_correction"] = bg.projection_correction;
  summary["pass"] = true;
  result.summary_json = summary.dump(2);
  write_text(cfg.out_dir, "summary.json", result.summary_json, result);
  return result;
}

RunResult run_dss_gen(const ExperimentConfig& cfg) {
  RunResult result;
  const Grid grid = build_grid(cfg.n, cfg.box_len);
  dss::DssParams p;
  p.lambda = cfg.dss_lambda;
  p.amplitude = cfg.data_norm;
  {
    int kmin = 0, kmax = 0;
    derive_shells_impl(p.lambda, grid, kmin, kmax);
    if (cfg.dss_k_min != 9999) kmin = cfg.dss_k_min;
    if (cfg.dss_k_max != 9999) kmax = cfg.dss_k_max;
    p.k_min = kmin;
    p.k_max = kmax;
  }
  const auto field = dss::make_dss_data(grid, p);
  std::filesystem::create_directories(cfg.out_dir);
  write_snapshot(field.field, cfg.out_dir + "/dss_datum.lnsf");
  result.written_files.push_back(cfg.out_dir + "/dss_datum.lnsf");
  const auto rep = dss::annulus_inequalities(field, p.lambda);
  write_text(cfg.out_dir, "dss_inequalities.json", rep.to_json(), result);

  ordered_json summary;
  summary["scenario"] = "dss_gen";
  summary["lambda"] = p.lambda;
  summary["amplitude"] = p.amplitude;
  summary["k_min"] = p.k_min;
  summary["k_max"] = p.k_max;
  summary["weak_l3_norm"] = field.weak_l3_norm;
  summary["spectral_divergence"] = field.spectral_divergence;
  summary["annulus_both_hold"] = rep.both_hold();
  summary["pass"] = rep.both_hold();
  result.exit_code = rep.both_hold() ? kExitPass : kExitFail;
  result.summary_json = summary.dump(2);
  write_text(cfg.out_dir, "summary.json", result.summary_json, result);
  return result;
}

RunResult run_scenario(const ExperimentConfig& cfg) {
  if (cfg.scenario == "stability") return run_stability(cfg);
  if (cfg.scenario == "counterexample") return run_counterexample(cfg);
  if (cfg.scenario == "verify") return run_verify(cfg);
  if (cfg.scenario == "simulate") return run_simulate(cfg);
  if (cfg.scenario == "fixedpoint_demo" || cfg.scenario == "fixedpoint-demo")
    return run_fixedpoint_demo(cfg);
  if (cfg.scenario == "norms") return run_norms(cfg);
  if (cfg.scenario == "landau_gen" || cfg.scenario == "landau-gen")
    return run_landau_gen(cfg);
  if (cfg.scenario == "dss_gen" || cfg.scenario == "dss-gen") return run_dss_gen(cfg);
  throw std::invalid_argument("unknown scenario '" + cfg.scenario + "'");
}

}  // namespace pns::experiment
