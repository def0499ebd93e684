#include "pns/grid.hpp"

#include <cmath>

namespace pns {

namespace {
bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

Grid build_grid(int n, double box_len) {
  if (!is_power_of_two(n) || n < 8)
    throw std::invalid_argument("build_grid: n must be a power of two >= 8, got " +
                                std::to_string(n));
  if (!(box_len > 0.0) || !std::isfinite(box_len))
    throw std::invalid_argument("build_grid: box_len must be positive");
  Grid g;
  g.n = n;
  g.box_len = box_len;
  // Division by a power of two is exact, so spacing * n == box_len.
  g.spacing = box_len / n;
  g.cell_measure = g.spacing * g.spacing * g.spacing;
  return g;
}

VectorField3 sample_field(const Grid& grid, const PointFn3& f, const Vec3& off) {
  VectorField3 out(grid);
  const int n = grid.n;
  for (int ix = 0; ix < n; ++ix) {
    const double x = grid.coord(ix, off[0]);
    for (int iy = 0; iy < n; ++iy) {
      const double y = grid.coord(iy, off[1]);
      for (int iz = 0; iz < n; ++iz) {
        const double z = grid.coord(iz, off[2]);
        const Vec3 v = f(x, y, z);
        if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]))
          throw std::runtime_error(
              "sample_field: non-finite value at node (" + std::to_string(ix) + "," +
              std::to_string(iy) + "," + std::to_string(iz) + "), x=(" +
              std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(z) +
              ")");
        const std::size_t idx = grid.index(ix, iy, iz);
        out.comp[0][idx] = v[0];
        out.comp[1][idx] = v[1];
        out.comp[2][idx] = v[2];
      }
    }
  }
  return out;
}

ScalarField sample_scalar(const Grid& grid, const PointFn1& f, const Vec3& off) {
  ScalarField out(grid);
  const int n = grid.n;
  for (int ix = 0; ix < n; ++ix) {
    const double x = grid.coord(ix, off[0]);
    for (int iy = 0; iy < n; ++iy) {
      const double y = grid.coord(iy, off[1]);
      for (int iz = 0; iz < n; ++iz) {
        const double z = grid.coord(iz, off[2]);
        const double v = f(x, y, z);
        if (!std::isfinite(v))
          throw std::runtime_error(
              "sample_scalar: non-finite value at node (" + std::to_string(ix) + "," +
              std::to_string(iy) + "," + std::to_string(iz) + ")");
        out.values[grid.index(ix, iy, iz)] = v;
      }
    }
  }
  return out;
}

ScalarField magnitude(const VectorField3& u) {
  ScalarField m(u.grid);
  const std::size_t sz = u.grid.size();
  for (std::size_t i = 0; i < sz; ++i)
    m.values[i] = std::sqrt(u.comp[0][i] * u.comp[0][i] + u.comp[1][i] * u.comp[1][i] +
                            u.comp[2][i] * u.comp[2][i]);
  return m;
}

bool all_finite(const VectorField3& u) {
  for (int c = 0; c < 3; ++c)
    for (double v : u.comp[c])
      if (!std::isfinite(v)) return false;
  return true;
}

bool all_finite(const ScalarField& f) {
  for (double v : f.values)
    if (!std::isfinite(v)) return false;
  return true;
}

double max_abs(const VectorField3& u) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c)
    for (double v : u.comp[c]) m = std::max(m, std::abs(v));
  return m;
}

VectorField3 add(const VectorField3& a, const VectorField3& b) {
  check_same_grid(a.grid, b.grid);
  VectorField3 r(a.grid);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < r.comp[c].size(); ++i)
      r.comp[c][i] = a.comp[c][i] + b.comp[c][i];
  return r;
}

VectorField3 sub(const VectorField3& a, const VectorField3& b) {
  check_same_grid(a.grid, b.grid);
  VectorField3 r(a.grid);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < r.comp[c].size(); ++i)
      r.comp[c][i] = a.comp[c][i] - b.comp[c][i];
  return r;
}

VectorField3 scaled(const VectorField3& a, double s) {
  VectorField3 r(a.grid);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < r.comp[c].size(); ++i) r.comp[c][i] = s * a.comp[c][i];
  return r;
}

}  // namespace pns
