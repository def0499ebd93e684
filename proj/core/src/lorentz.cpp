#include "pns/lorentz.hpp"

#include <algorithm>
#include <cmath>

#include "pns/spectral.hpp"

#include "json.hpp"

namespace pns::lorentz {

LorentzIndex LorentzIndex::pq(double p, double q) {
  if (!(p > 1.0)) throw std::invalid_argument("LorentzIndex: p must be > 1");
  if (!(q > 1.0)) throw std::invalid_argument("LorentzIndex: q must be > 1 (or infinity)");
  return LorentzIndex{p, q, false};
}

LorentzIndex LorentzIndex::weak(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("LorentzIndex: p must be > 1");
  return LorentzIndex{p, 0.0, true};
}

namespace {

DistributionSummary summarize(std::vector<double> mags, double cell_measure,
                              double total_measure) {
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  DistributionSummary s;
  s.cell_measure = cell_measure;
  s.total_measure = total_measure;
  std::size_t i = 0;
  while (i < mags.size()) {
    std::size_t j = i;
    while (j < mags.size() && mags[j] == mags[i]) ++j;
    s.values.push_back(mags[i]);
    s.measures.push_back(cell_measure * static_cast<double>(j));
    i = j;
  }
  return s;
}

}  // namespace

DistributionSummary distribution_summary(const ScalarField& f) {
  std::vector<double> mags(f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) mags[i] = std::abs(f.values[i]);
  const double total = f.grid.box_len * f.grid.box_len * f.grid.box_len;
  return summarize(std::move(mags), f.grid.cell_measure, total);
}

DistributionSummary distribution_summary(const VectorField3& f) {
  const std::size_t sz = f.grid.size();
  std::vector<double> mags(sz);
  for (std::size_t i = 0; i < sz; ++i)
    mags[i] = std::sqrt(f.comp[0][i] * f.comp[0][i] + f.comp[1][i] * f.comp[1][i] +
                        f.comp[2][i] * f.comp[2][i]);
  const double total = f.grid.box_len * f.grid.box_len * f.grid.box_len;
  return summarize(std::move(mags), f.grid.cell_measure, total);
}

double distribution_function(const DistributionSummary& s, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("distribution_function: alpha must be >= 0");
  // Largest k with values[k] > alpha; values are descending.
  auto it = std::lower_bound(s.values.begin(), s.values.end(), alpha,
                             [](double v, double a) { return v > a; });
  if (it == s.values.begin()) return 0.0;
  return s.measures[static_cast<std::size_t>(it - s.values.begin()) - 1];
}

double distribution_function(const ScalarField& f, double alpha) {
  return distribution_function(distribution_summary(f), alpha);
}

double distribution_function(const VectorField3& f, double alpha) {
  return distribution_function(distribution_summary(f), alpha);
}

double lorentz_quasinorm(const DistributionSummary& s, const LorentzIndex& idx) {
  if (!(idx.p > 1.0) || (!idx.q_inf && !(idx.q > 1.0)))
    throw std::invalid_argument("lorentz_quasinorm: invalid index");
  if (s.values.empty()) return 0.0;

  if (idx.q_inf) {
    double sup = 0.0;
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      if (s.values[k] <= 0.0) break;
      sup = std::max(sup, s.values[k] * std::pow(s.measures[k], 1.0 / idx.p));
    }
    return sup;
  }

  // p * integral_0^inf a^{q-1} d(a)^{q/p} da with d piecewise constant:
  // (p/q) * sum_k mu_k^{q/p} (v_k^q - v_{k+1}^q), v_{m+1} = 0.
  const double p = idx.p, q = idx.q;
  long double acc = 0.0L;
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    if (s.values[k] <= 0.0) break;
    const double v_hi = s.values[k];
    const double v_lo = (k + 1 < s.values.size()) ? s.values[k + 1] : 0.0;
    const long double span =
        static_cast<long double>(std::pow(v_hi, q)) - static_cast<long double>(std::pow(v_lo, q));
    acc += static_cast<long double>(std::pow(s.measures[k], q / p)) * span;
  }
  acc *= static_cast<long double>(p / q);
  return std::pow(static_cast<double>(acc), 1.0 / q);
}

double lorentz_quasinorm(const ScalarField& f, const LorentzIndex& idx) {
  return lorentz_quasinorm(distribution_summary(f), idx);
}

double lorentz_quasinorm(const VectorField3& f, const LorentzIndex& idx) {
  return lorentz_quasinorm(distribution_summary(f), idx);
}

double lp_norm(const ScalarField& f, double p) {
  long double acc = 0.0L;
  for (double v : f.values) acc += std::pow(std::abs(v), p);
  acc *= static_cast<long double>(f.grid.cell_measure);
  return std::pow(static_cast<double>(acc), 1.0 / p);
}

double lp_norm(const VectorField3& f, double p) {
  long double acc = 0.0L;
  const std::size_t sz = f.grid.size();
  for (std::size_t i = 0; i < sz; ++i) {
    const double m = std::sqrt(f.comp[0][i] * f.comp[0][i] + f.comp[1][i] * f.comp[1][i] +
                               f.comp[2][i] * f.comp[2][i]);
    acc += std::pow(m, p);
  }
  acc *= static_cast<long double>(f.grid.cell_measure);
  return std::pow(static_cast<double>(acc), 1.0 / p);
}

double l2_norm(const VectorField3& f) {
  long double acc = 0.0L;
  const std::size_t sz = f.grid.size();
  for (std::size_t i = 0; i < sz; ++i)
    acc += f.comp[0][i] * f.comp[0][i] + f.comp[1][i] * f.comp[1][i] +
           f.comp[2][i] * f.comp[2][i];
  acc *= static_cast<long double>(f.grid.cell_measure);
  return std::sqrt(static_cast<double>(acc));
}

SplitPair level_split(const VectorField3& U, double delta, double t) {
  if (!(delta > 0.0)) throw std::invalid_argument("level_split: delta must be > 0");
  if (!(t > 0.0)) throw std::invalid_argument("level_split: t must be > 0");

  SplitPair sp;
  sp.threshold = delta / std::sqrt(t);
  sp.low = VectorField3(U.grid);
  sp.high = VectorField3(U.grid);

  const std::size_t sz = U.grid.size();
  std::size_t high_cells = 0;
  for (std::size_t i = 0; i < sz; ++i) {
    const double m = std::sqrt(U.comp[0][i] * U.comp[0][i] + U.comp[1][i] * U.comp[1][i] +
                               U.comp[2][i] * U.comp[2][i]);
    if (m >= sp.threshold) {
      ++high_cells;
      for (int c = 0; c < 3; ++c) sp.high.comp[c][i] = U.comp[c][i];
    } else {
      sp.low_sup = std::max(sp.low_sup, m);
      for (int c = 0; c < 3; ++c) sp.low.comp[c][i] = U.comp[c][i];
    }
  }
  sp.high_support_measure = U.grid.cell_measure * static_cast<double>(high_cells);

  const double weak3 = lorentz_quasinorm(U, LorentzIndex::weak(3.0));
  const double st = std::sqrt(t) / delta;
  sp.support_measure_bound = st * st * st * weak3 * weak3 * weak3;
  sp.sup_bound_holds = sp.low_sup <= sp.threshold;
  sp.support_bound_holds =
      sp.high_support_measure <= sp.support_measure_bound * (1.0 + 1e-12);
  return sp;
}

ScalarField convolve(const ScalarField& f, const ScalarField& g) {
  check_same_grid(f.grid, g.grid);
  auto fh = spectral::forward_scalar(f);
  const auto gh = spectral::forward_scalar(g);
  for (std::size_t i = 0; i < fh.size(); ++i) fh[i] *= gh[i];
  ScalarField out = spectral::inverse_scalar(f.grid, fh);
  // One factor of n^3 from undoing the forward normalization of g, times h^3,
  // gives the Riemann-sum convolution weight.
  const double scale = static_cast<double>(f.grid.size()) * f.grid.cell_measure;
  for (double& v : out.values) v *= scale;
  return out;
}

LorentzReport make_report(const VectorField3& f, const LorentzIndex& idx) {
  const auto s = distribution_summary(f);
  return LorentzReport{idx.p, idx.q, idx.q_inf, lorentz_quasinorm(s, idx), s.breakpoints()};
}

LorentzReport make_report(const ScalarField& f, const LorentzIndex& idx) {
  const auto s = distribution_summary(f);
  return LorentzReport{idx.p, idx.q, idx.q_inf, lorentz_quasinorm(s, idx), s.breakpoints()};
}

std::string to_json(const LorentzReport& r) {
  nlohmann::ordered_json j;
  j["p"] = r.p;
  if (r.q_inf)
    j["q"] = nullptr;
  else
    j["q"] = r.q;
  j["value"] = r.value;
  j["breakpoints_count"] = r.breakpoints_count;
  return j.dump();
}

}  // namespace pns::lorentz
