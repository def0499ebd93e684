#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pns {

using Vec3 = std::array<double, 3>;

/// Uniform periodic box [-L/2, L/2)^3 with n nodes per axis.
///
/// n must be a power of two so that spacing = L/n is exact in binary
/// floating point and the FFT path stays power-of-two.
struct Grid {
  int n = 0;
  double box_len = 0.0;
  double spacing = 0.0;
  double cell_measure = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }

  // Index order: x slowest, z fastest.
  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * n + iy) * n + iz;
  }

  /// Physical coordinate of node i along one axis, with optional offset.
  double coord(int i, double offset = 0.0) const {
    return -0.5 * box_len + i * spacing + offset;
  }
};

Grid build_grid(int n, double box_len);

/// Three-component real field sampled at the nodes of a periodic grid.
struct VectorField3 {
  Grid grid;
  std::array<std::vector<double>, 3> comp;

  VectorField3() = default;
  explicit VectorField3(const Grid& g)
      : grid(g), comp{std::vector<double>(g.size(), 0.0),
                      std::vector<double>(g.size(), 0.0),
                      std::vector<double>(g.size(), 0.0)} {}
};

struct ScalarField {
  Grid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const Grid& g) : grid(g), values(g.size(), 0.0) {}
};

using PointFn3 = std::function<Vec3(double, double, double)>;
using PointFn1 = std::function<double(double, double, double)>;

/// Samples f at the cell nodes x_j = -L/2 + j h + offset.
/// Throws if f is non-finite at any node, naming the node.
VectorField3 sample_field(const Grid& grid, const PointFn3& f,
                          const Vec3& center_offset = {0.0, 0.0, 0.0});
ScalarField sample_scalar(const Grid& grid, const PointFn1& f,
                          const Vec3& center_offset = {0.0, 0.0, 0.0});

/// Pointwise Euclidean magnitude of a vector field.
ScalarField magnitude(const VectorField3& u);

bool all_finite(const VectorField3& u);
bool all_finite(const ScalarField& f);

double max_abs(const VectorField3& u);

// Elementwise helpers used across the solver modules.
VectorField3 add(const VectorField3& a, const VectorField3& b);
VectorField3 sub(const VectorField3& a, const VectorField3& b);
VectorField3 scaled(const VectorField3& a, double s);

inline void check_same_grid(const Grid& a, const Grid& b) {
  if (a.n != b.n || a.box_len != b.box_len)
    throw std::invalid_argument("grid mismatch: fields live on different grids");
}

}  // namespace pns
