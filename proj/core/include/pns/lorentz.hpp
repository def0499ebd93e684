#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pns/grid.hpp"

namespace pns::lorentz {

/// Lorentz exponent pair (p, q), p in (1,inf), q in (1,inf]. q = infinity is
/// encoded explicitly via q_inf.
struct LorentzIndex {
  double p = 3.0;
  double q = 3.0;
  bool q_inf = false;

  static LorentzIndex pq(double p, double q);
  static LorentzIndex weak(double p);
};

/// Level-set summary of a piecewise-constant grid field: distinct magnitudes
/// v_1 > v_2 > ... > v_m >= 0 together with cumulative measures
/// mu_k = cell_measure * #{cells : |f| >= v_k}.
struct DistributionSummary {
  std::vector<double> values;
  std::vector<double> measures;
  double cell_measure = 0.0;
  double total_measure = 0.0;

  std::size_t breakpoints() const { return values.size(); }
};

DistributionSummary distribution_summary(const ScalarField& f);
DistributionSummary distribution_summary(const VectorField3& f);

/// d_f(alpha) = cell_measure * #{cells : |f| > alpha}. Right-continuous and
/// non-increasing in alpha. Throws on alpha < 0.
double distribution_function(const DistributionSummary& s, double alpha);
double distribution_function(const ScalarField& f, double alpha);
double distribution_function(const VectorField3& f, double alpha);

/// Exact Lorentz quasinorm of a piecewise-constant field. For q < inf the
/// layer integral is evaluated in closed form on each interval where the
/// distribution function is constant; for q = inf it is the sup of
/// v_k * mu_k^{1/p} over breakpoints. No quadrature error either way.
double lorentz_quasinorm(const DistributionSummary& s, const LorentzIndex& idx);
double lorentz_quasinorm(const ScalarField& f, const LorentzIndex& idx);
double lorentz_quasinorm(const VectorField3& f, const LorentzIndex& idx);

/// Plain L^p norm by direct summation, (sum |f|^p h^3)^{1/p}. This is the
/// independent route used to cross-check the quasinorm at q = p.
double lp_norm(const ScalarField& f, double p);
double lp_norm(const VectorField3& f, double p);

double l2_norm(const VectorField3& f);

/// High/low split of U at threshold delta / sqrt(t). Ties go to high,
/// matching the indicator |U| >= threshold. low + high == U exactly and the
/// two supports are disjoint cellwise.
struct SplitPair {
  VectorField3 low;
  VectorField3 high;
  double threshold = 0.0;
  double low_sup = 0.0;               // max |low|; <= threshold by construction
  double high_support_measure = 0.0;  // |S_t| = cell_measure * #{|U| >= threshold}
  double support_measure_bound = 0.0; // (sqrt(t)/delta)^3 ||U||^3_{3,inf}
  bool sup_bound_holds = false;
  bool support_bound_holds = false;
};

SplitPair level_split(const VectorField3& U, double delta, double t);

/// Periodic convolution scaled by cell_measure, approximating the
/// whole-space integral of f(x-y) g(y). Commutative; same-grid operands.
ScalarField convolve(const ScalarField& f, const ScalarField& g);

struct LorentzReport {
  double p = 0.0;
  double q = 0.0;
  bool q_inf = false;
  double value = 0.0;
  std::size_t breakpoints_count = 0;
};

LorentzReport make_report(const VectorField3& f, const LorentzIndex& idx);
LorentzReport make_report(const ScalarField& f, const LorentzIndex& idx);
std::string to_json(const LorentzReport& r);

}  // namespace pns::lorentz
