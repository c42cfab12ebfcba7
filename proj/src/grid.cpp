#include "anisoac/grid.hpp"

#include <algorithm>
#include <cmath>

namespace anisoac {

Grid::Grid(int dim_, std::array<int, 3> cells_, std::array<double, 3> lengths_)
    : dim(dim_), cells(cells_), lengths(lengths_) {
  require(dim >= 1 && dim <= 3, "Grid: dim must be 1, 2 or 3");
  for (int a = dim; a < 3; ++a) {
    cells[a] = 1;
    lengths[a] = 1.0;
  }
  for (int a = 0; a < dim; ++a) {
    require(cells[a] >= 8, "Grid: need at least 8 cells per axis");
    require(lengths[a] > 0, "Grid: period lengths must be positive");
  }
  for (int a = 0; a < 3; ++a) h[a] = lengths[a] / cells[a];
}

Grid::Grid(int dim_, int cells_per_axis, double length)
    : Grid(dim_, {cells_per_axis, cells_per_axis, cells_per_axis},
           {length, length, length}) {}

ScalarField::ScalarField(const Grid& g, std::vector<double> data)
    : grid(&g), v(std::move(data)) {
  require(std::int64_t(v.size()) == g.size(), "ScalarField: size mismatch with grid");
  check_finite();
}

void ScalarField::check_finite(const char* what) const {
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite value");
}

ConformalMetric::ConformalMetric(ScalarField phi_field)
    : grid(phi_field.grid), phi(std::move(phi_field)) {
  phi.check_finite("ConformalMetric phi");
  const auto n = phi.v.size();
  volw.resize(n);
  gradw.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    volw[i] = std::exp(grid->dim * phi.v[i]);
    gradw[i] = std::exp(-2.0 * phi.v[i]);
  }
}

VectorField grad(const ScalarField& u) {
  const Grid& g = *u.grid;
  VectorField out(g);
  const std::int64_t N = g.size();
  for (int a = 0; a < g.dim; ++a) {
    const double inv2h = 1.0 / (2.0 * g.h[a]);
    double* dst = out.v.data() + std::size_t(a) * N;
    for (std::int64_t i = 0; i < N; ++i) {
      dst[i] = (u[g.shift(i, a, +1)] - u[g.shift(i, a, -1)]) * inv2h;
    }
  }
  return out;
}

ScalarField div(const VectorField& X, const ConformalMetric* metric) {
  const Grid& g = *X.grid;
  ScalarField out(g);
  const std::int64_t N = g.size();
  for (int a = 0; a < g.dim; ++a) {
    const double inv2h = 1.0 / (2.0 * g.h[a]);
    const double* src = X.v.data() + std::size_t(a) * N;
    for (std::int64_t i = 0; i < N; ++i) {
      const std::int64_t ip = g.shift(i, a, +1), im = g.shift(i, a, -1);
      const double wp = metric ? metric->volw[std::size_t(ip)] : 1.0;
      const double wm = metric ? metric->volw[std::size_t(im)] : 1.0;
      out[i] += (wp * src[ip] - wm * src[im]) * inv2h;
    }
  }
  if (metric) {
    for (std::int64_t i = 0; i < N; ++i) out[i] /= metric->volw[std::size_t(i)];
  }
  return out;
}

namespace {
double weighted_sum(const Grid& g, const std::vector<double>& prod,
                    const ConformalMetric* metric) {
  const double dv = g.cell_volume();
  if (!metric) return pairwise_sum(prod) * dv;
  std::vector<double> tmp(prod.size());
  for (std::size_t i = 0; i < prod.size(); ++i) tmp[i] = prod[i] * metric->volw[i];
  return pairwise_sum(tmp) * dv;
}
}  // namespace

double integrate(const ScalarField& f, const ConformalMetric* metric) {
  return weighted_sum(*f.grid, f.v, metric);
}

double inner(const ScalarField& a, const ScalarField& b, const ConformalMetric* metric) {
  require(a.grid->same_layout(*b.grid), "inner: grid mismatch");
  std::vector<double> prod(a.v.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = a.v[i] * b.v[i];
  return weighted_sum(*a.grid, prod, metric);
}

double inner(const VectorField& a, const VectorField& b, const ConformalMetric* metric) {
  require(a.grid->same_layout(*b.grid), "inner: grid mismatch");
  const std::int64_t N = a.grid->size();
  std::vector<double> prod(std::size_t(N), 0.0);
  for (int c = 0; c < a.grid->dim; ++c)
    for (std::int64_t i = 0; i < N; ++i) prod[std::size_t(i)] += a.at(c, i) * b.at(c, i);
  return weighted_sum(*a.grid, prod, metric);
}

double norm_l2(const ScalarField& a, const ConformalMetric* metric) {
  return std::sqrt(std::max(0.0, inner(a, a, metric)));
}

double norm_sup(const ScalarField& a) {
  double m = 0;
  for (double x : a.v) m = std::max(m, std::abs(x));
  return m;
}

double ball_mass(const ScalarField& f, const Vec& center, double r,
                 const ConformalMetric* metric) {
  const Grid& g = *f.grid;
  double min_len = g.lengths[0];
  for (int a = 1; a < g.dim; ++a) min_len = std::min(min_len, g.lengths[a]);
  require(r > 0 && r <= 0.5 * min_len, "ball_mass: radius must be in (0, half period]");
  std::vector<double> vals;
  vals.reserve(256);
  const std::int64_t N = g.size();
  for (std::int64_t i = 0; i < N; ++i) {
    const Vec x = g.position(g.coords(i));
    if (g.per_distance(x, center) <= r) {
      const double w = metric ? metric->volw[std::size_t(i)] : 1.0;
      vals.push_back(f[i] * w);
    }
  }
  return pairwise_sum(vals) * g.cell_volume();
}

double interp(const ScalarField& f, const Vec& x) {
  const Grid& g = *f.grid;
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> frac{0, 0, 0};
  for (int a = 0; a < g.dim; ++a) {
    const double t = x[a] / g.h[a];
    const double fl = std::floor(t);
    base[a] = g.wrap(int(fl), a);
    frac[a] = t - fl;
  }
  double acc = 0.0;
  const int corners = 1 << g.dim;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::array<int, 3> idx = base;
    for (int a = 0; a < g.dim; ++a) {
      const int bit = (c >> a) & 1;
      w *= bit ? frac[a] : (1.0 - frac[a]);
      if (bit) idx[a] = g.wrap(idx[a] + 1, a);
    }
    acc += w * f[g.index(idx[0], idx[1], idx[2])];
  }
  return acc;
}

std::vector<double> line_slice(const ScalarField& f, const Vec& base, const Vec& dir,
                               double t_end, int n) {
  require(n >= 2, "line_slice: need at least two samples");
  const double nd = norm(dir);
  require(nd > 0, "line_slice: zero direction");
  const Vec d = scaled(dir, 1.0 / nd);
  std::vector<double> out(std::size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const double t = t_end * double(i) / double(n);
    Vec x{base[0] + t * d[0], base[1] + t * d[1], base[2] + t * d[2]};
    out[std::size_t(i)] = interp(f, x);
  }
  return out;
}

}  // namespace anisoac
