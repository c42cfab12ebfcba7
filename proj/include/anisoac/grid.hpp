#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "anisoac/util.hpp"

namespace anisoac {

// Uniform periodic grid on a flat torus, dim in {1,2,3}. Cell i sits at
// x_a = i_a * h_a; all fields are sampled at these points and wrap around.
struct Grid {
  int dim = 2;
  std::array<int, 3> cells{1, 1, 1};
  std::array<double, 3> lengths{1, 1, 1};
  std::array<double, 3> h{1, 1, 1};

  Grid(int dim_, std::array<int, 3> cells_, std::array<double, 3> lengths_);
  Grid(int dim_, int cells_per_axis, double length = 1.0);

  std::int64_t size() const {
    return std::int64_t(cells[0]) * cells[1] * cells[2];
  }
  double cell_volume() const { return h[0] * h[1] * h[2] / pad_; }

  std::int64_t index(int i, int j = 0, int k = 0) const {
    return (std::int64_t(i) * cells[1] + j) * cells[2] + k;
  }
  std::array<int, 3> coords(std::int64_t idx) const {
    const int k = int(idx % cells[2]);
    idx /= cells[2];
    const int j = int(idx % cells[1]);
    return {int(idx / cells[1]), j, k};
  }
  Vec position(const std::array<int, 3>& c) const {
    return {c[0] * h[0], c[1] * h[1], c[2] * h[2]};
  }
  int wrap(int i, int axis) const {
    const int n = cells[axis];
    i %= n;
    return i < 0 ? i + n : i;
  }
  // Periodic neighbor `by` steps along `axis`.
  std::int64_t shift(std::int64_t idx, int axis, int by) const {
    auto c = coords(idx);
    c[axis] = wrap(c[axis] + by, axis);
    return index(c[0], c[1], c[2]);
  }
  // Shortest signed periodic offset from a to b along axis.
  double per_delta(double a, double b, int axis) const {
    const double L = lengths[axis];
    double d = std::fmod(b - a, L);
    if (d > 0.5 * L) d -= L;
    if (d < -0.5 * L) d += L;
    return d;
  }
  double per_distance(const Vec& a, const Vec& b) const {
    double s = 0;
    for (int ax = 0; ax < dim; ++ax) {
      const double d = per_delta(a[ax], b[ax], ax);
      s += d * d;
    }
    return std::sqrt(s);
  }
  bool same_layout(const Grid& o) const {
    return dim == o.dim && cells == o.cells && lengths == o.lengths;
  }

 private:
  double pad_ = 1.0;  // product of h over unused axes (they are 1 anyway)
};

struct ScalarField {
  const Grid* grid = nullptr;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0)
      : grid(&g), v(std::size_t(g.size()), fill) {}
  ScalarField(const Grid& g, std::vector<double> data);

  double& operator[](std::int64_t i) { return v[std::size_t(i)]; }
  double operator[](std::int64_t i) const { return v[std::size_t(i)]; }
  std::int64_t size() const { return std::int64_t(v.size()); }
  void check_finite(const char* what = "ScalarField") const;
};

// Per-component storage: component a occupies [a*N, (a+1)*N).
struct VectorField {
  const Grid* grid = nullptr;
  std::vector<double> v;

  VectorField() = default;
  explicit VectorField(const Grid& g) : grid(&g), v(std::size_t(g.size()) * g.dim, 0.0) {}
  double& at(int comp, std::int64_t i) { return v[std::size_t(comp) * grid->size() + i]; }
  double at(int comp, std::int64_t i) const {
    return v[std::size_t(comp) * grid->size() + i];
  }
  Vec vec_at(std::int64_t i) const {
    Vec r{};
    for (int a = 0; a < grid->dim; ++a) r[a] = at(a, i);
    return r;
  }
};

// Conformal factor exp(2*phi) on the flat metric. Stores the volume weight
// exp(dim*phi) and the inverse-metric weight exp(-2*phi) per cell.
struct ConformalMetric {
  const Grid* grid = nullptr;
  ScalarField phi;
  std::vector<double> volw;   // exp(dim*phi)
  std::vector<double> gradw;  // exp(-2*phi)

  ConformalMetric() = default;
  explicit ConformalMetric(ScalarField phi_field);
};

// --- discrete calculus -----------------------------------------------------

// Centered second-order periodic differences, one component per axis.
VectorField grad(const ScalarField& u);

// Exact negative adjoint of grad under the volume-weighted cell-sum inner
// product: <grad u, X> + <u, div X> = 0 up to rounding.
ScalarField div(const VectorField& X, const ConformalMetric* metric = nullptr);

// Volume-weighted integrals and inner products.
double integrate(const ScalarField& f, const ConformalMetric* metric = nullptr);
double inner(const ScalarField& a, const ScalarField& b,
             const ConformalMetric* metric = nullptr);
double inner(const VectorField& a, const VectorField& b,
             const ConformalMetric* metric = nullptr);
double norm_l2(const ScalarField& a, const ConformalMetric* metric = nullptr);
double norm_sup(const ScalarField& a);

// Mass of f over the periodic ball B_r(center); r at most half the smallest
// period.
double ball_mass(const ScalarField& f, const Vec& center, double r,
                 const ConformalMetric* metric = nullptr);

// Multilinear periodic interpolation at an arbitrary point.
double interp(const ScalarField& f, const Vec& x);

// Samples of f along the periodic line base + t*dir, t in [0, t_end), n points.
std::vector<double> line_slice(const ScalarField& f, const Vec& base, const Vec& dir,
                               double t_end, int n);

}  // namespace anisoac
