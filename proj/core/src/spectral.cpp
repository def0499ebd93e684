#include "pns/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace pns::spectral {

namespace {

// Process-wide FFTW plan cache keyed by grid size. Plans are created with
// FFTW_ESTIMATE so the chosen algorithm (and therefore rounding) is identical
// across runs; new-array execution is used on caller buffers.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache pc;
    return pc;
  }

  void forward(int n, const double* in, Complex* out) {
    const Entry& e = entry(n);
    // Out-of-place r2c preserves its input.
    fftw_execute_dft_r2c(e.fwd, const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
  }

  // c2r destroys its input; callers pass a scratch copy.
  void inverse(int n, Complex* in, double* out) {
    const Entry& e = entry(n);
    fftw_execute_dft_c2r(e.bwd, reinterpret_cast<fftw_complex*>(in), out);
  }

 private:
  struct Entry {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
  };

  const Entry& entry(int n) {
    std::scoped_lock lock(mu_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    const std::size_t nr = static_cast<std::size_t>(n) * n * n;
    const std::size_t nc = static_cast<std::size_t>(n) * n * (n / 2 + 1);
    std::vector<double> rbuf(nr);
    std::vector<Complex> cbuf(nc);
    Entry e;
    e.fwd = fftw_plan_dft_r2c_3d(n, n, n, rbuf.data(),
                                 reinterpret_cast<fftw_complex*>(cbuf.data()),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    e.bwd = fftw_plan_dft_c2r_3d(n, n, n, reinterpret_cast<fftw_complex*>(cbuf.data()),
                                 rbuf.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!e.fwd || !e.bwd) throw std::runtime_error("FFTW plan creation failed");
    return plans_.emplace(n, e).first->second;
  }

  std::map<int, Entry> plans_;
  std::mutex mu_;
};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

SpectralVectorField3::SpectralVectorField3(const Grid& g)
    : grid(g), comp{std::vector<Complex>(spectral_size(g)),
                    std::vector<Complex>(spectral_size(g)),
                    std::vector<Complex>(spectral_size(g))} {}

std::size_t spectral_size(const Grid& g) {
  return static_cast<std::size_t>(g.n) * g.n * (g.n / 2 + 1);
}

std::vector<Complex> forward_scalar(const ScalarField& f) {
  const int n = f.grid.n;
  std::vector<Complex> out(spectral_size(f.grid));
  PlanCache::instance().forward(n, f.values.data(), out.data());
  const double scale = 1.0 / static_cast<double>(f.grid.size());
  for (Complex& c : out) c *= scale;
  return out;
}

ScalarField inverse_scalar(const Grid& g, const std::vector<Complex>& fh) {
  if (fh.size() != spectral_size(g))
    throw std::invalid_argument("inverse_scalar: size mismatch");
  std::vector<Complex> scratch(fh);
  ScalarField out(g);
  PlanCache::instance().inverse(g.n, scratch.data(), out.values.data());
  return out;
}

SpectralVectorField3 forward(const VectorField3& u) {
  SpectralVectorField3 out(u.grid);
  const double scale = 1.0 / static_cast<double>(u.grid.size());
  for (int c = 0; c < 3; ++c) {
    PlanCache::instance().forward(u.grid.n, u.comp[c].data(), out.comp[c].data());
    for (Complex& z : out.comp[c]) z *= scale;
  }
  return out;
}

VectorField3 inverse(const SpectralVectorField3& uh) {
  VectorField3 out(uh.grid);
  std::vector<Complex> scratch;
  for (int c = 0; c < 3; ++c) {
    scratch = uh.comp[c];
    PlanCache::instance().inverse(uh.grid.n, scratch.data(), out.comp[c].data());
  }
  return out;
}

void leray_project(SpectralVectorField3& u) {
  const int n = u.grid.n;
  const double k0 = kTwoPi / u.grid.box_len;
  const int nzh = n / 2 + 1;
  for (int ix = 0; ix < n; ++ix) {
    const double kx = k0 * signed_freq(ix, n);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = k0 * signed_freq(iy, n);
      std::size_t idx = (static_cast<std::size_t>(ix) * n + iy) * nzh;
      for (int iz = 0; iz < nzh; ++iz, ++idx) {
        const double kz = k0 * iz;
        const double k2 = kx * kx + ky * ky + kz * kz;
        if (k2 == 0.0) continue;  // zero mode left unchanged
        const Complex kdotu =
            kx * u.comp[0][idx] + ky * u.comp[1][idx] + kz * u.comp[2][idx];
        const Complex s = kdotu / k2;
        u.comp[0][idx] -= kx * s;
        u.comp[1][idx] -= ky * s;
        u.comp[2][idx] -= kz * s;
      }
    }
  }
}

void heat_propagate(SpectralVectorField3& u, double t) {
  if (t < 0.0) throw std::invalid_argument("heat_propagate: t must be >= 0");
  if (t == 0.0) return;
  const int n = u.grid.n;
  const double k0 = kTwoPi / u.grid.box_len;
  const int nzh = n / 2 + 1;
  for (int ix = 0; ix < n; ++ix) {
    const double kx = k0 * signed_freq(ix, n);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = k0 * signed_freq(iy, n);
      std::size_t idx = (static_cast<std::size_t>(ix) * n + iy) * nzh;
      for (int iz = 0; iz < nzh; ++iz, ++idx) {
        const double kz = k0 * iz;
        const double decay = std::exp(-(kx * kx + ky * ky + kz * kz) * t);
        u.comp[0][idx] *= decay;
        u.comp[1][idx] *= decay;
        u.comp[2][idx] *= decay;
      }
    }
  }
}

SpectralVectorField3 heat_propagated(const SpectralVectorField3& u, double t) {
  SpectralVectorField3 out = u;
  heat_propagate(out, t);
  return out;
}

SpectralVectorField3 oseen_apply(const SpectralVectorField3& u, double t,
                                 const std::array<int, 3>& alpha) {
  if (!(t > 0.0)) throw std::invalid_argument("oseen_apply: t must be > 0");
  const int order = alpha[0] + alpha[1] + alpha[2];
  if (alpha[0] < 0 || alpha[1] < 0 || alpha[2] < 0 || order > 2)
    throw std::invalid_argument("oseen_apply: |alpha| must be <= 2");

  SpectralVectorField3 out = u;
  const int n = out.grid.n;
  const double k0 = kTwoPi / out.grid.box_len;
  const int nzh = n / 2 + 1;
  // i^|alpha| as a complex phase.
  static constexpr Complex kPhase[3] = {Complex(1, 0), Complex(0, 1), Complex(-1, 0)};
  const Complex phase = kPhase[order % 3 == 2 ? 2 : order];

  for (int ix = 0; ix < n; ++ix) {
    const int mx = signed_freq(ix, n);
    const double kx = k0 * mx;
    for (int iy = 0; iy < n; ++iy) {
      const int my = signed_freq(iy, n);
      const double ky = k0 * my;
      std::size_t idx = (static_cast<std::size_t>(ix) * n + iy) * nzh;
      for (int iz = 0; iz < nzh; ++iz, ++idx) {
        const double kz = k0 * iz;
        const double k2 = kx * kx + ky * ky + kz * kz;
        const bool nyquist_odd = ((alpha[0] % 2) && std::abs(mx) == n / 2) ||
                                 ((alpha[1] % 2) && std::abs(my) == n / 2) ||
                                 ((alpha[2] % 2) && iz == n / 2);
        double kpow = 1.0;
        for (int a = 0; a < alpha[0]; ++a) kpow *= kx;
        for (int a = 0; a < alpha[1]; ++a) kpow *= ky;
        for (int a = 0; a < alpha[2]; ++a) kpow *= kz;
        if (nyquist_odd || (order > 0 && k2 == 0.0)) {
          out.comp[0][idx] = out.comp[1][idx] = out.comp[2][idx] = Complex(0, 0);
          continue;
        }
        Complex v0 = out.comp[0][idx], v1 = out.comp[1][idx], v2 = out.comp[2][idx];
        if (k2 != 0.0) {
          const Complex kdotu = (kx * v0 + ky * v1 + kz * v2) / k2;
          v0 -= kx * kdotu;
          v1 -= ky * kdotu;
          v2 -= kz * kdotu;
        }
        const Complex m = phase * (kpow * std::exp(-k2 * t));
        out.comp[0][idx] = m * v0;
        out.comp[1][idx] = m * v1;
        out.comp[2][idx] = m * v2;
      }
    }
  }
  return out;
}

void dealias(SpectralVectorField3& u) {
  const int n = u.grid.n;
  const int nzh = n / 2 + 1;
  for (int ix = 0; ix < n; ++ix) {
    const int mx = std::abs(signed_freq(ix, n));
    for (int iy = 0; iy < n; ++iy) {
      const int my = std::abs(signed_freq(iy, n));
      std::size_t idx = (static_cast<std::size_t>(ix) * n + iy) * nzh;
      for (int iz = 0; iz < nzh; ++iz, ++idx) {
        if (3 * mx > n || 3 * my > n || 3 * iz > n) {
          u.comp[0][idx] = u.comp[1][idx] = u.comp[2][idx] = Complex(0, 0);
        }
      }
    }
  }
}

SpectralVectorField3 advection_divergence_spectral(const VectorField3& u,
                                                   const VectorField3& v) {
  check_same_grid(u.grid, v.grid);
  const Grid& g = u.grid;
  const int n = g.n;
  const int nzh = n / 2 + 1;
  const double k0 = kTwoPi / g.box_len;
  const std::size_t sz = g.size();

  SpectralVectorField3 out(g);
  ScalarField prod(g);
  std::vector<Complex> prod_hat(spectral_size(g));
  const double scale = 1.0 / static_cast<double>(sz);

  for (int i = 0; i < 3; ++i) {    // output component
    for (int j = 0; j < 3; ++j) {  // transported-by index
      for (std::size_t c = 0; c < sz; ++c) prod.values[c] = u.comp[j][c] * v.comp[i][c];
      PlanCache::instance().forward(n, prod.values.data(), prod_hat.data());
      for (int ix = 0; ix < n; ++ix) {
        const double kj_x = k0 * signed_freq(ix, n);
        for (int iy = 0; iy < n; ++iy) {
          const double kj_y = k0 * signed_freq(iy, n);
          std::size_t idx = (static_cast<std::size_t>(ix) * n + iy) * nzh;
          for (int iz = 0; iz < nzh; ++iz, ++idx) {
            const double kj = (j == 0) ? kj_x : (j == 1) ? kj_y : k0 * iz;
            // (i k_j) T_hat, with the forward 1/n^3 folded in.
            out.comp[i][idx] += Complex(0.0, kj * scale) * prod_hat[idx];
          }
        }
      }
    }
  }
  dealias(out);
  return out;
}

VectorField3 advection_divergence(const VectorField3& u, const VectorField3& v) {
  return inverse(advection_divergence_spectral(u, v));
}

double max_divergence(const SpectralVectorField3& u) {
  const int n = u.grid.n;
  const double k0 = kTwoPi / u.grid.box_len;
  const int nzh = n / 2 + 1;
  double worst = 0.0;
  for (int ix = 0; ix < n; ++ix) {
    const double kx = k0 * signed_freq(ix, n);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = k0 * signed_freq(iy, n);
      std::size_t idx = (static_cast<std::size_t>(ix) * n + iy) * nzh;
      for (int iz = 0; iz < nzh; ++iz, ++idx) {
        const double kz = k0 * iz;
        const double k2 = kx * kx + ky * ky + kz * kz;
        if (k2 == 0.0) continue;
        const Complex d =
            kx * u.comp[0][idx] + ky * u.comp[1][idx] + kz * u.comp[2][idx];
        worst = std::max(worst, std::abs(d) / std::sqrt(k2));
      }
    }
  }
  return worst;
}

double max_mode_norm(const SpectralVectorField3& u) {
  double worst = 0.0;
  for (int c = 0; c < 3; ++c)
    for (const Complex& z : u.comp[c]) worst = std::max(worst, std::abs(z));
  return worst;
}

namespace {

template <typename WeightFn>
double parseval_sum(const SpectralVectorField3& u, WeightFn&& wfn) {
  const int n = u.grid.n;
  const double k0 = kTwoPi / u.grid.box_len;
  const int nzh = n / 2 + 1;
  long double acc = 0.0L;
  for (int ix = 0; ix < n; ++ix) {
    const double kx = k0 * signed_freq(ix, n);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = k0 * signed_freq(iy, n);
      std::size_t idx = (static_cast<std::size_t>(ix) * n + iy) * nzh;
      for (int iz = 0; iz < nzh; ++iz, ++idx) {
        const double kz = k0 * iz;
        const double hw = (iz == 0 || iz == n / 2) ? 1.0 : 2.0;
        const double m2 = std::norm(u.comp[0][idx]) + std::norm(u.comp[1][idx]) +
                          std::norm(u.comp[2][idx]);
        acc += hw * wfn(kx * kx + ky * ky + kz * kz) * m2;
      }
    }
  }
  const double vol = u.grid.box_len * u.grid.box_len * u.grid.box_len;
  return std::sqrt(static_cast<double>(acc) * vol);
}

}  // namespace

double l2_norm(const SpectralVectorField3& u) {
  return parseval_sum(u, [](double) { return 1.0; });
}

double h1dot_norm(const SpectralVectorField3& u) {
  return parseval_sum(u, [](double k2) { return k2; });
}

SpectralVectorField3 add(const SpectralVectorField3& a, const SpectralVectorField3& b) {
  SpectralVectorField3 r = a;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < r.comp[c].size(); ++i) r.comp[c][i] += b.comp[c][i];
  return r;
}

SpectralVectorField3 sub(const SpectralVectorField3& a, const SpectralVectorField3& b) {
  SpectralVectorField3 r = a;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < r.comp[c].size(); ++i) r.comp[c][i] -= b.comp[c][i];
  return r;
}

SpectralVectorField3 scaled(const SpectralVectorField3& a, double s) {
  SpectralVectorField3 r = a;
  for (int c = 0; c < 3; ++c)
    for (Complex& z : r.comp[c]) z *= s;
  return r;
}

void axpy(SpectralVectorField3& y, double a, const SpectralVectorField3& x) {
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < y.comp[c].size(); ++i) y.comp[c][i] += a * x.comp[c][i];
}

void Multiplier::apply(SpectralVectorField3& u) const {
  switch (kind) {
    case Kind::heat:
      heat_propagate(u, t);
      break;
    case Kind::leray:
      leray_project(u);
      break;
    case Kind::derivative: {
      // Realized through the Oseen multiplier with the projection removed is
      // not possible, so apply (ik)^alpha directly.
      const int n = u.grid.n;
      const double k0 = kTwoPi / u.grid.box_len;
      const int nzh = n / 2 + 1;
      const int order = alpha[0] + alpha[1] + alpha[2];
      static constexpr Complex kPhase[3] = {Complex(1, 0), Complex(0, 1), Complex(-1, 0)};
      const Complex phase = kPhase[order % 3 == 2 ? 2 : order];
      for (int ix = 0; ix < n; ++ix) {
        const int mx = signed_freq(ix, n);
        for (int iy = 0; iy < n; ++iy) {
          const int my = signed_freq(iy, n);
          std::size_t idx = (static_cast<std::size_t>(ix) * n + iy) * nzh;
          for (int iz = 0; iz < nzh; ++iz, ++idx) {
            const bool nyq = ((alpha[0] % 2) && std::abs(mx) == n / 2) ||
                             ((alpha[1] % 2) && std::abs(my) == n / 2) ||
                             ((alpha[2] % 2) && iz == n / 2);
            double kpow = 1.0;
            for (int a = 0; a < alpha[0]; ++a) kpow *= k0 * mx;
            for (int a = 0; a < alpha[1]; ++a) kpow *= k0 * my;
            for (int a = 0; a < alpha[2]; ++a) kpow *= k0 * iz;
            const Complex m = nyq ? Complex(0, 0) : phase * kpow;
            u.comp[0][idx] *= m;
            u.comp[1][idx] *= m;
            u.comp[2][idx] *= m;
          }
        }
      }
      break;
    }
    case Kind::dealias_mask:
      dealias(u);
      break;
  }
}

}  // namespace pns::spectral
