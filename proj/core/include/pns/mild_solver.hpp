#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pns/fixed_point.hpp"
#include "pns/grid.hpp"
#include "pns/lorentz.hpp"
#include "pns/spectral.hpp"

namespace pns::solver {

enum class Scheme { etd1, etd2 };

struct SolverConfig {
  double dt = 0.01;
  double t_end = 1.0;
  Scheme scheme = Scheme::etd2;
  int picard_iters = 30;
  double delta_split = 1.0;  // delta of the high/low splitting diagnostics
  int snapshot_stride = 10;  // snapshots every k-th step (always at 0 and t_end)
  int norm_stride = 1;       // Lorentz/Kato norm rows every k-th step
  double q = 3.0;            // secondary index for the L^{3,q} series
  std::vector<double> kato_p_list = {4.0, 6.0, 8.0, 10.0, 16.0};
};

/// Per-step scalars that are cheap on the spectral side. trilinear is
/// integral of u . (u . grad U) dx, zero when no background is present.
struct StepRow {
  double t = 0.0;
  double l2 = 0.0;
  double h1dot = 0.0;
  double trilinear = 0.0;
};

/// Sampled norm rows (every norm_stride steps): the L^{3,q} family plus the
/// plain L^p norms backing the Kato functionals.
struct NormRow {
  double t = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double l3q = 0.0;
  double l3winf = 0.0;
  double h1dot = 0.0;
  std::vector<double> lp;  // aligned with config.kato_p_list
};

struct SolutionTrajectory {
  Grid grid;
  SolverConfig config;
  std::vector<StepRow> steps;
  std::vector<NormRow> norms;
  std::vector<double> snapshot_times;
  std::vector<VectorField3> snapshots;

  enum class Status { completed, aborted_nan } status = Status::completed;
  double last_good_time = 0.0;
  double max_cfl = 0.0;  // reported, not enforced

  /// CSV: t,L2,L3,L3q,L3winf,H1dot,K_p... (one column per configured p).
  std::string norms_csv() const;

  const VectorField3* snapshot_at(double t, double tol) const;
};

/// e^{t Delta} u0.
VectorField3 caloric(const VectorField3& u0, double t);

/// Trajectory on a uniform time grid t_j = j dt, stored spectrally. This is
/// the carrier for the Duhamel operator and the trajectory-space Picard
/// iteration.
struct FieldSeries {
  Grid grid;
  double dt = 0.0;
  std::vector<spectral::SpectralVectorField3> nodes;

  static FieldSeries constant(const VectorField3& f, double dt, int n_nodes);
  static FieldSeries caloric_series(const VectorField3& u0, double dt, int n_nodes);
  int index_of(double t) const;  // throws if t is not a grid time
};

/// B(u,v)(t) = -int_0^t e^{(t-s)Delta} P div(u (x) v) ds. The integrand is
/// frozen at substep midpoints and the heat factor integrated exactly per
/// substep, which absorbs the kernel singularity; the Leray projection is
/// applied last.
VectorField3 duhamel_B(const FieldSeries& u, const FieldSeries& v, double t,
                       int substeps = 1);

/// Same quadrature evaluated at every node time via the semigroup recurrence
/// S_{J+1} = e^{-|k|^2 ds} S_J + w_J; linear cost in the number of nodes.
FieldSeries duhamel_B_series(const FieldSeries& u, const FieldSeries& v,
                             int substeps = 1);

struct PicardRunReport {
  fixedpoint::PicardTrace trace;  // norms in the trajectory X norm
  bool smallness_ok = true;
  std::string warning;
  double linear_quotient = 0.0;  // measured vs the 1/8 bound
};

/// Picard iteration of the mild equation on the sampled-trajectory space with
/// the X = max(K, Y) norm. Faithful to the fixed-point construction; coarse
/// grids only (n <= 32). Smallness violations warn rather than abort, and any
/// divergence is then reported honestly in the trace.
std::pair<SolutionTrajectory, PicardRunReport> picard_solve(
    const VectorField3& u0, const VectorField3* U, const SolverConfig& config,
    double eps1_threshold = 0.0, double eps2_threshold = 0.0);

/// ETD1/ETD2 integrating-factor stepper for the perturbed equation; the
/// production route for long horizons.
SolutionTrajectory time_step_solve(const VectorField3& u0, const VectorField3* U,
                                   const SolverConfig& config);

struct KatoNorms {
  std::vector<std::pair<double, double>> per_p;  // (p, ||u||_{K_p})
  double K = 0.0;
  double Y = 0.0;
  double X = 0.0;
};

/// K_p = sup_t (1/p) t^{1/2 - 3/(2p)} ||u||_{L^p}(t) over snapshot times,
/// Y = sup_t ||u||_{L^{3,q}}, X = max(K, Y). Requires p in (3, inf).
KatoNorms kato_norms(const SolutionTrajectory& traj, const std::vector<double>& p_list,
                     double q);

struct EnergyReport {
  double max_rel_residual = 0.0;  // Simpson residual of the balance, relative
  double A = 0.0;                 // ||U||_{L^{3,inf}}
  double K_hat = 0.0;             // empirical trilinear ratio
  double AK = 0.0;
  bool ak_below_one = true;
  bool inequality_holds = true;
  int pairs_checked = 0;
  double worst_pair_slack = 0.0;  // most negative margin across (s,t) pairs
};

/// Discrete balance d/dt 1/2||u||^2 + ||grad u||^2 + int u.(u.grad U) = 0 and
/// the strong-energy-inequality form with the measured trilinear constant.
EnergyReport energy_monitor(const SolutionTrajectory& traj, const VectorField3* U);

struct CaloricConvergenceRow {
  double t = 0.0;
  double diff_norm = 0.0;
};

struct CaloricConvergenceReport {
  std::vector<CaloricConvergenceRow> series;  // ||e^{tD}u0 - u0|| in L^{3,q}
  double u0_norm = 0.0;
  double max_value = 0.0;
  double final_over_max = 0.0;    // last (smallest t) over max
  double min_over_u0_norm = 0.0;  // plateau floor indicator
};

/// Probes strong continuity at t -> 0+ in L^{3,q}: decays for q < inf on
/// smooth data, plateaus for self-similar data measured in weak-L^3.
CaloricConvergenceReport caloric_convergence_report(const VectorField3& u0,
                                                    const lorentz::LorentzIndex& idx,
                                                    const std::vector<double>& t_grid);

}  // namespace pns::solver
