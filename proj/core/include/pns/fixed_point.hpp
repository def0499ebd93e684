#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pns::fixedpoint {

/// Carrier contract for the perturbed bilinear fixed point. A Space hands the
/// solver the normed-space operations for its vector type; norms must satisfy
/// the triangle inequality and absolute homogeneity (probed in tests, assumed
/// here).
template <class S>
concept NormedSpace = requires(const S& s, const typename S::Vector& a,
                               const typename S::Vector& b, double c,
                               std::mt19937_64& rng) {
  { s.add(a, b) } -> std::convertible_to<typename S::Vector>;
  { s.sub(a, b) } -> std::convertible_to<typename S::Vector>;
  { s.scale(c, a) } -> std::convertible_to<typename S::Vector>;
  { s.norm(a) } -> std::convertible_to<double>;
  { s.zero() } -> std::convertible_to<typename S::Vector>;
  { s.random_unit(rng) } -> std::convertible_to<typename S::Vector>;
};

struct PicardError : std::runtime_error {
  std::string code;
  PicardError(std::string c, const std::string& msg)
      : std::runtime_error(msg), code(std::move(c)) {}
};

struct PicardOptions {
  double tol = -1.0;  // < 0: use 1e-12 * max(1, ||e0||)
  int max_iter = 200;
  int probe_count = 32;
  std::uint64_t probe_seed = 0x9e3779b97f4a7c15ULL;
  bool check_preconditions = true;
};

struct PicardTraceRow {
  int iter = 0;
  double norm_e = 0.0;
  double diff_norm = 0.0;
  double ratio = 0.0;     // ||e_{n+1}-e_n|| / ||e_n-e_{n-1}||
  double residual = 0.0;  // ||Phi(e_n) - e_n||
};

struct PicardTrace {
  std::vector<PicardTraceRow> rows;
  double residual = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;

  double max_ratio() const {
    double m = 0.0;
    for (const auto& r : rows)
      if (std::isfinite(r.ratio)) m = std::max(m, r.ratio);
    return m;
  }

  double max_norm() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.norm_e);
    return m;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "iter,norm_e,diff_norm,ratio,residual\n";
    char buf[160];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.iter, r.norm_e,
                    r.diff_norm, r.ratio, r.residual);
      os << buf;
    }
    return os.str();
  }
};

namespace detail {

template <NormedSpace S, class Bilinear>
typename S::Vector apply_map(const S& sp, const typename S::Vector& e0, Bilinear& B,
                             const typename S::Vector& U, const typename S::Vector& e) {
  // Phi(e) = e0 - B(e,e) - B(U,e) - B(e,U)
  auto r = sp.sub(e0, B(e, e));
  r = sp.sub(r, B(U, e));
  r = sp.sub(r, B(e, U));
  return r;
}

}  // namespace detail

/// Verifies ||B(x,U)|| + ||B(U,x)|| <= (1/8)||x|| on random unit probes.
/// Returns the largest observed quotient.
template <NormedSpace S, class Bilinear>
double linear_bound_quotient(const S& sp, Bilinear&& B, const typename S::Vector& U,
                             int probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const auto x = sp.random_unit(rng);
    const double nx = sp.norm(x);
    const double q = (sp.norm(B(x, U)) + sp.norm(B(U, x))) / nx;
    worst = std::max(worst, q);
  }
  return worst;
}

/// Largest observed ||B(x,y)|| / (||x|| ||y||) over random unit probes.
template <NormedSpace S, class Bilinear>
double bilinear_bound_quotient(const S& sp, Bilinear&& B, int probes,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const auto x = sp.random_unit(rng);
    const auto y = sp.random_unit(rng);
    worst = std::max(worst, sp.norm(B(x, y)) / (sp.norm(x) * sp.norm(y)));
  }
  return worst;
}

/// Largest relative additivity violation of B in either slot, on random probes.
template <NormedSpace S, class Bilinear>
double bilinearity_defect(const S& sp, Bilinear&& B, int probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const auto x = sp.random_unit(rng);
    const auto y = sp.random_unit(rng);
    const auto z = sp.random_unit(rng);
    const auto lhs1 = B(sp.add(x, y), z);
    const auto rhs1 = sp.add(B(x, z), B(y, z));
    const auto lhs2 = B(z, sp.add(x, y));
    const auto rhs2 = sp.add(B(z, x), B(z, y));
    const double scale = std::max(1e-300, sp.norm(rhs1) + sp.norm(rhs2));
    worst = std::max(worst, (sp.norm(sp.sub(lhs1, rhs1)) + sp.norm(sp.sub(lhs2, rhs2))) / scale);
  }
  return worst;
}

/// Picard iteration for e = e0 - B(e,e) - B(U,e) - B(e,U).
///
/// Preconditions (checked unless disabled): C_B >= 1, ||e0|| <= eps <= 1/(4 C_B),
/// and the linear bound ||B(x,U)|| + ||B(U,x)|| <= (1/8)||x|| on random probes.
/// Under them the iteration contracts at rate 3/4 + 1/8 = 7/8 and stays in the
/// ball of radius 3 eps / 2.
template <NormedSpace S, class Bilinear>
std::pair<typename S::Vector, PicardTrace> solve_picard(const S& sp,
                                                        const typename S::Vector& e0,
                                                        Bilinear&& B,
                                                        const typename S::Vector& U,
                                                        double C_B, double eps,
                                                        PicardOptions opt = {}) {
  const double n0 = sp.norm(e0);
  if (opt.check_preconditions) {
    if (C_B < 1.0)
      throw PicardError("cb_below_one", "solve_picard: certified C_B must be >= 1");
    if (!(n0 <= eps * (1.0 + 1e-12)) || !(eps <= 0.25 / C_B * (1.0 + 1e-12)))
      throw PicardError("eps_too_large",
                        "solve_picard: need ||e0|| <= eps <= 1/(4 C_B); got ||e0|| = " +
                            std::to_string(n0) + ", eps = " + std::to_string(eps));
    const double lin = linear_bound_quotient(sp, B, U, opt.probe_count, opt.probe_seed);
    if (lin > 0.125 * (1.0 + 1e-9))
      throw PicardError("linear_bound_violated",
                        "solve_picard: linear bound quotient " + std::to_string(lin) +
                            " exceeds 1/8 on random probes");
  }
  const double tol = opt.tol > 0.0 ? opt.tol : 1e-12 * std::max(1.0, n0);

  PicardTrace trace;
  auto e_prev = e0;
  trace.rows.push_back({0, n0, 0.0, std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()});
  double prev_diff = std::numeric_limits<double>::quiet_NaN();
  for (int n = 1; n <= opt.max_iter; ++n) {
    auto e = detail::apply_map(sp, e0, B, U, e_prev);
    const double diff = sp.norm(sp.sub(e, e_prev));
    const double ratio = (std::isfinite(prev_diff) && prev_diff > 0.0)
                             ? diff / prev_diff
                             : std::numeric_limits<double>::quiet_NaN();
    trace.rows.back().residual = diff;  // ||Phi(e_{n-1}) - e_{n-1}||
    trace.rows.push_back({n, sp.norm(e), diff, ratio,
                          std::numeric_limits<double>::quiet_NaN()});
    e_prev = std::move(e);
    prev_diff = diff;
    if (diff <= tol) break;
  }
  // Residual decides convergence, not the iteration count.
  const auto mapped = detail::apply_map(sp, e0, B, U, e_prev);
  trace.residual = sp.norm(sp.sub(mapped, e_prev));
  trace.rows.back().residual = trace.residual;
  trace.converged = trace.residual <= tol;
  if (!trace.converged)
    throw PicardError("no_convergence",
                      "solve_picard: residual " + std::to_string(trace.residual) +
                          " above tolerance after " + std::to_string(opt.max_iter) +
                          " iterations");
  return {e_prev, trace};
}

struct UniquenessTrial {
  int trial = 0;
  double start_norm = 0.0;
  double limit_distance = 0.0;  // to the reference fixed point
  bool converged = false;
};

struct UniquenessReport {
  std::vector<UniquenessTrial> trials;
  double radius = 0.0;
  std::string active_bound;  // "3eps/2" or "7/(16 C_B)"
  double max_pairwise = 0.0;
  bool all_converged = false;
  int first_diverged_trial = -1;
};

/// Iterates the map from several starting points inside the uniqueness ball
/// and checks all limits coincide. The ball radius is the smaller of the
/// statement's 3 eps/2 and the proof's 7/(16 C_B); which one was active is
/// recorded.
template <NormedSpace S, class Bilinear>
UniquenessReport uniqueness_probe(const S& sp, const typename S::Vector& e0,
                                  Bilinear&& B, const typename S::Vector& U, double C_B,
                                  double eps, int trials, PicardOptions opt = {}) {
  auto [ref, ref_trace] = solve_picard(sp, e0, B, U, C_B, eps, opt);
  const double r_stmt = 1.5 * eps;
  const double r_proof = 7.0 / (16.0 * C_B);
  UniquenessReport rep;
  rep.radius = std::min(r_stmt, r_proof);
  rep.active_bound = r_stmt <= r_proof ? "3eps/2" : "7/(16 C_B)";
  const double tol = opt.tol > 0.0 ? opt.tol : 1e-12 * std::max(1.0, sp.norm(e0));

  std::mt19937_64 rng(opt.probe_seed ^ 0xabcdef12345ULL);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<typename S::Vector> limits;
  rep.all_converged = true;
  for (int t = 0; t < trials; ++t) {
    auto g = sp.scale(rep.radius * unif(rng), sp.random_unit(rng));
    UniquenessTrial trial;
    trial.trial = t;
    trial.start_norm = sp.norm(g);
    bool ok = false;
    for (int n = 0; n < opt.max_iter; ++n) {
      auto next = detail::apply_map(sp, e0, B, U, g);
      const double diff = sp.norm(sp.sub(next, g));
      g = std::move(next);
      if (diff <= tol) {
        ok = true;
        break;
      }
    }
    trial.converged = ok;
    trial.limit_distance = sp.norm(sp.sub(g, ref));
    if (!ok) {
      rep.all_converged = false;
      if (rep.first_diverged_trial < 0) rep.first_diverged_trial = t;
    }
    limits.push_back(g);
    rep.trials.push_back(trial);
  }
  for (std::size_t i = 0; i < limits.size(); ++i)
    for (std::size_t j = i + 1; j < limits.size(); ++j)
      rep.max_pairwise = std::max(rep.max_pairwise, sp.norm(sp.sub(limits[i], limits[j])));
  return rep;
}

/// Scalar carrier, used by the worked quadratic example and the CLI demo.
struct ScalarSpace {
  using Vector = double;
  double add(double a, double b) const { return a + b; }
  double sub(double a, double b) const { return a - b; }
  double scale(double c, double a) const { return c * a; }
  double norm(double a) const { return std::abs(a); }
  double zero() const { return 0.0; }
  double random_unit(std::mt19937_64& rng) const {
    return (rng() & 1) ? 1.0 : -1.0;
  }
};

/// Euclidean R^n carrier.
struct EuclideanSpace {
  using Vector = std::vector<double>;
  std::size_t dim = 8;

  Vector add(const Vector& a, const Vector& b) const {
    Vector r(a);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
  }
  Vector sub(const Vector& a, const Vector& b) const {
    Vector r(a);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
  }
  Vector scale(double c, const Vector& a) const {
    Vector r(a);
    for (auto& v : r) v *= c;
    return r;
  }
  double norm(const Vector& a) const {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
  }
  Vector zero() const { return Vector(dim, 0.0); }
  Vector random_unit(std::mt19937_64& rng) const {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(dim);
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (auto& c : v) {
        c = gauss(rng);
        n2 += c * c;
      }
    } while (n2 < 1e-12);
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& c : v) c *= inv;
    return v;
  }
};

}  // namespace pns::fixedpoint
