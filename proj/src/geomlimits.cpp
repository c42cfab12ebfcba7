#include "anisoac/geomlimits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace anisoac {

GridMeasure build_varifold(const ScalarField& u, const EnergyParams& p,
                           double grad_floor) {
  const Grid& g = *p.grid;
  GridMeasure V;
  V.grid = &g;
  const std::int64_t N = g.size();
  V.weight.assign(std::size_t(N), 0.0);
  V.normal = VectorField(g);
  V.has_normal.assign(std::size_t(N), 0);
  for (std::int64_t i = 0; i < N; ++i) {
    const Vec d = p.du_at(u, i);
    const double nd = norm(d);
    if (nd < grad_floor) continue;
    const double gw = p.metric ? p.metric->gradw[std::size_t(i)] : 1.0;
    V.weight[std::size_t(i)] =
        std::sqrt(std::max(0.0, 2.0 * p.potential->W(u[i]))) * std::sqrt(gw) * nd;
    V.has_normal[std::size_t(i)] = 1;
    for (int a = 0; a < g.dim; ++a) V.normal.at(a, i) = d[a] / nd;
  }
  return V;
}

double varifold_mass(const GridMeasure& V, const EnergyParams& p) {
  std::vector<double> w(V.weight.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = V.weight[i] * p.cellw[i];
  return pairwise_sum(w);
}

double varifold_mass_ball(const GridMeasure& V, const EnergyParams& p,
                          const Vec& center, double r) {
  const Grid& g = *p.grid;
  std::vector<double> w;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const Vec x = g.position(g.coords(i));
    if (g.per_distance(x, center) <= r)
      w.push_back(V.weight[std::size_t(i)] * p.cellw[std::size_t(i)]);
  }
  return w.empty() ? 0.0 : pairwise_sum(w);
}

std::vector<double> density_ratios(const GridMeasure& V, const EnergyParams& p,
                                   const Vec& x, const std::vector<double>& r_list) {
  std::vector<double> out;
  const int n = p.grid->dim;
  const double unit_ball = n == 1 ? 1.0 : (n == 2 ? 2.0 : std::numbers::pi);
  for (double r : r_list) {
    double min_len = p.grid->lengths[0];
    for (int a = 1; a < n; ++a) min_len = std::min(min_len, p.grid->lengths[a]);
    require(r > 0 && r <= 0.5 * min_len, "density_ratios: r exceeds half period");
    out.push_back(varifold_mass_ball(V, p, x, r) /
                  (unit_ball * std::pow(r, n - 1)));
  }
  return out;
}

double varifold_mass_aniso(const GridMeasure& V, const EnergyParams& p) {
  const Grid& g = *p.grid;
  std::vector<double> w(V.weight.size(), 0.0);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    if (!V.has_normal[std::size_t(i)]) continue;
    const Vec nu = V.normal.vec_at(i);
    const double Floc =
        std::sqrt(p.sfac[std::size_t(i)]) * p.integrand->f_base(nu);
    w[std::size_t(i)] = V.weight[std::size_t(i)] * Floc * p.cellw[std::size_t(i)];
  }
  return pairwise_sum(w);
}

ModicaReport modica_check(const ScalarField& u, const EnergyParams& p) {
  const Grid& g = *p.grid;
  ModicaReport rep;
  rep.discrepancy = ScalarField(g);
  const std::int64_t N = g.size();
  rep.max_discrepancy = -std::numeric_limits<double>::infinity();
  std::vector<double> pos(std::size_t(N), 0.0);
  for (std::int64_t i = 0; i < N; ++i) {
    const Vec d = p.du_at(u, i);
    const double xi = 0.5 * p.epsilon * p.sfac[std::size_t(i)] * p.integrand->fsq_base(d) -
                      p.potential->W(u[i]) / p.epsilon;
    rep.discrepancy[i] = xi;
    rep.max_discrepancy = std::max(rep.max_discrepancy, xi);
    pos[std::size_t(i)] = std::max(0.0, xi) * p.cellw[std::size_t(i)];
  }
  rep.positive_part_mass = pairwise_sum(pos);
  return rep;
}

namespace {
// (DX)_ab = d_b X_a by centered differences at cell i.
inline void dx_at(const VectorField& X, const EnergyParams& p, std::int64_t i,
                  Mat& DX) {
  const Grid& g = *X.grid;
  for (int a = 0; a < g.dim; ++a)
    for (int b = 0; b < g.dim; ++b)
      DX[a][b] = (X.at(a, p.up[b][std::size_t(i)]) - X.at(a, p.dn[b][std::size_t(i)])) /
                 (2.0 * g.h[b]);
}
}  // namespace

double first_variation_iso(const GridMeasure& V, const VectorField& X,
                           const EnergyParams& p) {
  const Grid& g = *p.grid;
  const std::int64_t N = g.size();
  std::vector<double> acc(std::size_t(N), 0.0);
  Mat DX;
  for (std::int64_t i = 0; i < N; ++i) {
    if (!V.has_normal[std::size_t(i)] || V.weight[std::size_t(i)] == 0) continue;
    dx_at(X, p, i, DX);
    double divX = 0, nDXn = 0;
    const Vec nu = V.normal.vec_at(i);
    for (int a = 0; a < g.dim; ++a) {
      divX += DX[a][a];
      for (int b = 0; b < g.dim; ++b) nDXn += nu[a] * DX[a][b] * nu[b];
    }
    acc[std::size_t(i)] = V.weight[std::size_t(i)] * (divX - nDXn) * p.cellw[std::size_t(i)];
  }
  return pairwise_sum(acc);
}

double first_variation_aniso(const GridMeasure& V, const VectorField& X,
                             const EnergyParams& p) {
  const Grid& g = *p.grid;
  const std::int64_t N = g.size();
  std::vector<double> acc(std::size_t(N), 0.0);
  Mat DX;
  for (std::int64_t i = 0; i < N; ++i) {
    if (!V.has_normal[std::size_t(i)] || V.weight[std::size_t(i)] == 0) continue;
    dx_at(X, p, i, DX);
    const Vec nu = V.normal.vec_at(i);
    const double sq = std::sqrt(p.sfac[std::size_t(i)]);
    const double F = sq * p.integrand->f_base(nu);
    const Vec dF = scaled(p.integrand->dfsq_base(nu), sq / (2.0 * p.integrand->f_base(nu)));
    double divX = 0;
    for (int a = 0; a < g.dim; ++a) divX += DX[a][a];
    // <DF(nu), DX^T nu> = sum_b dF_b * sum_a nu_a (DX)_ab
    double cross = 0;
    for (int b = 0; b < g.dim; ++b) {
      double s = 0;
      for (int a = 0; a < g.dim; ++a) s += nu[a] * DX[a][b];
      cross += dF[b] * s;
    }
    acc[std::size_t(i)] =
        V.weight[std::size_t(i)] * (F * divX - cross) * p.cellw[std::size_t(i)];
  }
  return pairwise_sum(acc);
}

TensorField stress_tensor(const ScalarField& u, const EnergyParams& p) {
  const Grid& g = *p.grid;
  TensorField T(g);
  const std::int64_t N = g.size();
  for (std::int64_t i = 0; i < N; ++i) {
    const Vec d = p.du_at(u, i);
    const double s = p.sfac[std::size_t(i)];
    const double e = 0.5 * p.epsilon * s * p.integrand->fsq_base(d) +
                     p.potential->W(u[i]) / p.epsilon;
    const Vec dfs = scaled(p.integrand->dfsq_base(d), 0.5 * s);
    for (int a = 0; a < g.dim; ++a)
      for (int b = 0; b < g.dim; ++b)
        T.at(i, a, b) = (a == b ? e : 0.0) - p.epsilon * d[a] * dfs[b];
  }
  return T;
}

double divergence_test(const TensorField& T, const VectorField& X,
                       const EnergyParams& p) {
  const Grid& g = *p.grid;
  const std::int64_t N = g.size();
  std::vector<double> acc(std::size_t(N), 0.0);
  Mat DX;
  for (std::int64_t i = 0; i < N; ++i) {
    dx_at(X, p, i, DX);
    double s = 0;
    for (int a = 0; a < g.dim; ++a)
      for (int b = 0; b < g.dim; ++b) s += T.at(i, a, b) * DX[a][b];
    acc[std::size_t(i)] = s * p.cellw[std::size_t(i)];
  }
  return pairwise_sum(acc);
}

std::vector<VectorField> trig_test_fields(const Grid& g) {
  std::vector<VectorField> out;
  const std::int64_t N = g.size();
  std::vector<Vec> ks;
  if (g.dim == 1) {
    ks = {{1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  } else {
    ks = {{1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  }
  for (const Vec& k : ks)
    for (int comp = 0; comp < std::min(g.dim, 2); ++comp)
      for (int phase = 0; phase < 2; ++phase) {
        VectorField X(g);
        for (std::int64_t i = 0; i < N; ++i) {
          const Vec x = g.position(g.coords(i));
          double arg = 0;
          for (int a = 0; a < g.dim; ++a)
            arg += 2.0 * std::numbers::pi * k[a] * x[a] / g.lengths[a];
          X.at(comp, i) = phase == 0 ? std::sin(arg) : std::cos(arg);
        }
        out.push_back(std::move(X));
        if (int(out.size()) == 12) return out;
      }
  return out;
}

double c1_norm(const VectorField& X) {
  const Grid& g = *X.grid;
  double m = 0;
  for (double v : X.v) m = std::max(m, std::abs(v));
  double md = 0;
  for (int a = 0; a < g.dim; ++a) {
    for (std::int64_t i = 0; i < g.size(); ++i) {
      for (int b = 0; b < g.dim; ++b) {
        const double d = (X.at(a, g.shift(i, b, +1)) - X.at(a, g.shift(i, b, -1))) /
                         (2.0 * g.h[b]);
        md = std::max(md, std::abs(d));
      }
    }
  }
  return m + md;
}

CFSplit cf_split(const ScalarField& u, const EnergyParams& p, double grad_floor) {
  const Grid& g = *p.grid;
  if (grad_floor < 0) grad_floor = 1e-8 / p.epsilon;
  CFSplit out;
  out.lambda = ScalarField(g);
  out.cf = TensorField(g);
  const std::int64_t N = g.size();
  for (std::int64_t i = 0; i < N; ++i) {
    const Vec d = p.du_at(u, i);
    const double s = p.sfac[std::size_t(i)];
    const double fsq = s * p.integrand->fsq_base(d);
    const double e = 0.5 * p.epsilon * fsq + p.potential->W(u[i]) / p.epsilon;
    out.lambda[i] = e > 0 ? std::min(p.epsilon * fsq / e, 1.0) : 0.0;
    const double nd = norm(d);
    if (nd <= grad_floor) continue;  // nu and C_F set to zero
    const Vec nu = scaled(d, 1.0 / nd);
    const double F = p.integrand->f_base(nu);
    const Vec dF = scaled(p.integrand->dfsq_base(nu), 1.0 / (2.0 * F));
    for (int a = 0; a < g.dim; ++a)
      for (int b = 0; b < g.dim; ++b)
        out.cf.at(i, a, b) = (a == b ? 1.0 : 0.0) - nu[a] * dF[b] / F;
  }
  return out;
}

StabilityReport stability_diagnostic(const ScalarField& u, const EnergyParams& p,
                                     const ScalarField& phi, double tau) {
  require(p.delta > 0, "stability_diagnostic: needs delta > 0");
  require(tau > 0, "stability_diagnostic: tau must be positive");
  const Grid& g = *p.grid;
  const std::int64_t N = g.size();
  std::vector<double> acc(std::size_t(N), 0.0);
  for (std::int64_t i = 0; i < N; ++i) {
    const Vec d = p.du_at(u, i);
    const double nd = norm(d);
    if (nd <= tau) continue;
    // Hessian of u by centered stencils
    Mat H = zero_mat();
    const auto c = g.coords(i);
    for (int a = 0; a < g.dim; ++a) {
      H[a][a] = (u[p.up[a][std::size_t(i)]] - 2.0 * u[i] + u[p.dn[a][std::size_t(i)]]) /
                (g.h[a] * g.h[a]);
      for (int b = a + 1; b < g.dim; ++b) {
        auto cc = c;
        auto at = [&](int da, int db) {
          cc = c;
          cc[a] = g.wrap(c[a] + da, a);
          cc[b] = g.wrap(c[b] + db, b);
          return u[g.index(cc[0], cc[1], cc[2])];
        };
        H[a][b] = H[b][a] =
            (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * g.h[a] * g.h[b]);
      }
    }
    const Vec nu = scaled(d, 1.0 / nd);
    // tangential block: P H P with P = I - nu nu^T
    Mat PH = zero_mat();
    for (int a = 0; a < g.dim; ++a)
      for (int b = 0; b < g.dim; ++b) {
        double s = 0;
        for (int q = 0; q < g.dim; ++q)
          for (int r = 0; r < g.dim; ++r) {
            const double Pa = (a == q ? 1.0 : 0.0) - nu[a] * nu[q];
            const double Pb = (r == b ? 1.0 : 0.0) - nu[r] * nu[b];
            s += Pa * H[q][r] * Pb;
          }
        PH[a][b] = s;
      }
    double frob = 0;
    for (int a = 0; a < g.dim; ++a)
      for (int b = 0; b < g.dim; ++b) frob += PH[a][b] * PH[a][b];
    const double II2 = frob / (nd * nd);
    const double fd2 = p.sfac[std::size_t(i)] * p.moll->g_base(d, false).G;
    acc[std::size_t(i)] =
        phi[i] * phi[i] * II2 * p.epsilon * fd2 * p.cellw[std::size_t(i)];
  }
  StabilityReport rep;
  rep.lhs = pairwise_sum(acc);
  rep.rhs = energy(u, p);
  rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

// --- slices -------------------------------------------------------------------

namespace {
double chi_eval(const SliceOptions& o, double t, double t_end) {
  if (o.chi_center < 0) return 1.0;
  double d = std::abs(t - o.chi_center);
  d = std::min(d, t_end - d);  // periodic distance along the line
  if (d <= o.chi_halfwidth) return 1.0;
  if (o.chi_falloff <= 0 || d >= o.chi_halfwidth + o.chi_falloff) return 0.0;
  const double s = (d - o.chi_halfwidth) / o.chi_falloff;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * s));
}
}  // namespace

SliceQuantization slice_quantization(const ScalarField& u, const EnergyParams& p,
                                     const std::array<int, 3>& winding,
                                     const SliceOptions& opts) {
  const Grid& g = *p.grid;
  Vec dirL{};
  int wmax = 0, axis_max = 0;
  for (int a = 0; a < g.dim; ++a) {
    dirL[a] = winding[a] * g.lengths[a];
    if (std::abs(winding[a]) > wmax) {
      wmax = std::abs(winding[a]);
      axis_max = a;
    }
  }
  require(wmax > 0, "slice_quantization: zero winding");
  const double t_end = norm(dirL);
  const Vec dhat = scaled(dirL, 1.0 / t_end);

  const ScalarField dens = energy_density_rawF(u, p);
  const VectorField du = grad(u);
  const double cw = p.potential->cw();

  // base points: the lattice hyperplane transverse to the dominant axis
  std::vector<Vec> bases;
  {
    auto c = std::array<int, 3>{0, 0, 0};
    std::function<void(int)> rec = [&](int a) {
      if (a == g.dim) {
        bases.push_back(g.position(c));
        return;
      }
      if (a == axis_max) {
        c[a] = 0;
        rec(a + 1);
      } else {
        for (int i = 0; i < g.cells[a]; ++i) {
          c[a] = i;
          rec(a + 1);
        }
      }
    };
    rec(0);
  }

  int max_cells = 0;
  for (int a = 0; a < g.dim; ++a) max_cells = std::max(max_cells, g.cells[a]);
  const int nsamp = opts.samples_per_cell * max_cells * wmax;
  const double dt = t_end / nsamp;

  // gradient components as interpolatable scalar fields
  std::vector<ScalarField> comp;
  for (int a = 0; a < g.dim; ++a) {
    ScalarField f(g);
    for (std::int64_t i = 0; i < g.size(); ++i) f[i] = du.at(a, i);
    comp.push_back(std::move(f));
  }

  ScalarField gwf;
  if (p.metric) {
    gwf = ScalarField(g);
    for (std::int64_t i = 0; i < g.size(); ++i) gwf[i] = p.metric->gradw[std::size_t(i)];
  }

  SliceQuantization out;
  int certified = 0;
  for (const Vec& base : bases) {
    SliceRecord rec;
    rec.base = base;
    double q = 0, tang = 0, total = 0;
    for (int j = 0; j < nsamp; ++j) {
      const double t = dt * j;
      const Vec x{base[0] + t * dhat[0], base[1] + t * dhat[1], base[2] + t * dhat[2]};
      const double chi = chi_eval(opts, t, t_end);
      q += chi * interp(dens, x) * dt;
      Vec gloc{};
      for (int a = 0; a < g.dim; ++a) gloc[a] = interp(comp[std::size_t(a)], x);
      const double gpar = dot(gloc, dhat);
      const double g2 = dot(gloc, gloc);
      total += chi * p.epsilon * g2 * dt;
      tang += chi * p.epsilon * std::max(0.0, g2 - gpar * gpar) * dt;
    }
    rec.q = q;
    const double gw = p.metric ? interp(gwf, base) : 1.0;
    const double Fdir = std::sqrt(gw) * p.integrand->F(base, dhat);
    rec.q_normalized = q / (cw * Fdir);
    rec.nearest_k = std::max(0, int(std::lround(rec.q_normalized)));
    rec.residual = std::abs(rec.q_normalized - rec.nearest_k);
    rec.tangential_fraction = total > 0 ? tang / total : 0.0;
    rec.certified = (total < opts.empty_line_floor) ||
                    (rec.tangential_fraction <= opts.tangential_max_fraction);
    if (total < opts.empty_line_floor && q < opts.empty_line_floor) {
      rec.nearest_k = 0;
      rec.residual = std::abs(rec.q_normalized);
    }
    if (rec.certified) {
      ++certified;
      out.histogram[rec.nearest_k]++;
    }
    out.lines.push_back(rec);
  }
  out.certified_fraction = out.lines.empty() ? 0.0 : double(certified) / out.lines.size();
  int best_count = -1;
  for (const auto& [k, c] : out.histogram)
    if (c > best_count) {
      best_count = c;
      out.modal_k = k;
    }
  return out;
}

TangentialEnergy tangential_energy(const ScalarField& u, const EnergyParams& p,
                                   const Vec& dir) {
  const Grid& g = *p.grid;
  const double nd = norm(dir);
  require(nd > 0, "tangential_energy: zero direction");
  const Vec dhat = scaled(dir, 1.0 / nd);
  const std::int64_t N = g.size();
  std::vector<double> at(std::size_t(N), 0.0), tot(std::size_t(N), 0.0);
  for (std::int64_t i = 0; i < N; ++i) {
    const Vec d = p.du_at(u, i);
    const double g2 = dot(d, d);
    const double gpar = dot(d, dhat);
    tot[std::size_t(i)] = p.epsilon * g2 * p.cellw[std::size_t(i)];
    at[std::size_t(i)] =
        p.epsilon * std::max(0.0, g2 - gpar * gpar) * p.cellw[std::size_t(i)];
  }
  TangentialEnergy out;
  out.tangential = pairwise_sum(at);
  out.total = pairwise_sum(tot);
  return out;
}

// --- interface extraction ------------------------------------------------------

namespace {
// orient `nrm` by the interpolated gradient of u at x
void orient_normal(const ScalarField& u, const Vec& x, Vec& nrm) {
  const Grid& g = *u.grid;
  Vec gr{};
  for (int a = 0; a < g.dim; ++a) {
    Vec xp = x, xm = x;
    xp[a] += 0.5 * g.h[a];
    xm[a] -= 0.5 * g.h[a];
    gr[a] = (interp(u, xp) - interp(u, xm)) / g.h[a];
  }
  if (dot(gr, nrm) < 0) nrm = scaled(nrm, -1.0);
}
}  // namespace

Interface extract_interface(const ScalarField& u, double level) {
  const Grid& g = *u.grid;
  Interface out;
  const std::int64_t N = g.size();

  if (g.dim == 1) {
    for (std::int64_t i = 0; i < N; ++i) {
      const double a = u[i] - level, b = u[g.shift(i, 0, +1)] - level;
      if (a == 0.0 || a * b >= 0) continue;
      const double t = a / (a - b);
      InterfaceElement el;
      el.midpoint = {g.position(g.coords(i))[0] + t * g.h[0], 0, 0};
      el.measure = 1;
      el.normal = {b > a ? 1.0 : -1.0, 0, 0};
      out.elements.push_back(el);
      out.total_measure += 1;
    }
  } else if (g.dim == 2) {
    // marching squares with linear edge interpolation
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) {
        const int i1 = g.wrap(i + 1, 0), j1 = g.wrap(j + 1, 1);
        const double v00 = u[g.index(i, j)] - level;
        const double v10 = u[g.index(i1, j)] - level;
        const double v01 = u[g.index(i, j1)] - level;
        const double v11 = u[g.index(i1, j1)] - level;
        const double x0 = i * g.h[0], y0 = j * g.h[1];
        auto edge = [&](double a, double b, double xa, double ya, double xb,
                        double yb) -> Vec {
          const double t = a / (a - b);
          return {xa + t * (xb - xa), ya + t * (yb - ya), 0};
        };
        std::vector<Vec> pts;
        if (v00 * v10 < 0) pts.push_back(edge(v00, v10, x0, y0, x0 + g.h[0], y0));
        if (v10 * v11 < 0)
          pts.push_back(edge(v10, v11, x0 + g.h[0], y0, x0 + g.h[0], y0 + g.h[1]));
        if (v01 * v11 < 0)
          pts.push_back(edge(v01, v11, x0, y0 + g.h[1], x0 + g.h[0], y0 + g.h[1]));
        if (v00 * v01 < 0) pts.push_back(edge(v00, v01, x0, y0, x0, y0 + g.h[1]));
        if (pts.size() == 4) {
          // saddle square: split by the center average
          const double c = 0.25 * (v00 + v10 + v01 + v11);
          // pair edges so segments separate the corners consistently
          if ((v00 > 0) == (c > 0)) {
            std::swap(pts[1], pts[3]);
          }
          for (int s = 0; s < 2; ++s) {
            InterfaceElement el;
            const Vec& A = pts[std::size_t(2 * s)];
            const Vec& B = pts[std::size_t(2 * s + 1)];
            el.midpoint = {0.5 * (A[0] + B[0]), 0.5 * (A[1] + B[1]), 0};
            el.measure = std::hypot(B[0] - A[0], B[1] - A[1]);
            el.normal = {-(B[1] - A[1]), B[0] - A[0], 0};
            const double nn = norm(el.normal);
            if (nn > 0) el.normal = scaled(el.normal, 1.0 / nn);
            orient_normal(u, el.midpoint, el.normal);
            out.elements.push_back(el);
            out.total_measure += el.measure;
          }
        } else if (pts.size() == 2) {
          InterfaceElement el;
          el.midpoint = {0.5 * (pts[0][0] + pts[1][0]), 0.5 * (pts[0][1] + pts[1][1]),
                         0};
          el.measure = std::hypot(pts[1][0] - pts[0][0], pts[1][1] - pts[0][1]);
          el.normal = {-(pts[1][1] - pts[0][1]), pts[1][0] - pts[0][0], 0};
          const double nn = norm(el.normal);
          if (nn > 0) el.normal = scaled(el.normal, 1.0 / nn);
          orient_normal(u, el.midpoint, el.normal);
          out.elements.push_back(el);
          out.total_measure += el.measure;
        }
      }
  } else {
    // marching tetrahedra: six tets per cube, linear interpolation on edges
    static const int tets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                                   {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j)
        for (int k = 0; k < g.cells[2]; ++k) {
          Vec corner[8];
          double val[8];
          for (int c = 0; c < 8; ++c) {
            const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
            corner[c] = {(i + di) * g.h[0], (j + dj) * g.h[1], (k + dk) * g.h[2]};
            val[c] = u[g.index(g.wrap(i + di, 0), g.wrap(j + dj, 1), g.wrap(k + dk, 2))] -
                     level;
          }
          for (const auto& tet : tets) {
            Vec pts[4];
            int npts = 0;
            for (int e0 = 0; e0 < 4 && npts < 4; ++e0)
              for (int e1 = e0 + 1; e1 < 4 && npts < 4; ++e1) {
                const double a = val[tet[e0]], b = val[tet[e1]];
                if (a * b < 0) {
                  const double t = a / (a - b);
                  const Vec &A = corner[tet[e0]], &B = corner[tet[e1]];
                  pts[npts++] = {A[0] + t * (B[0] - A[0]), A[1] + t * (B[1] - A[1]),
                                 A[2] + t * (B[2] - A[2])};
                }
              }
            auto emit_tri = [&](const Vec& A, const Vec& B, const Vec& C) {
              const Vec ab = minus(B, A), ac = minus(C, A);
              Vec nrm{ab[1] * ac[2] - ab[2] * ac[1], ab[2] * ac[0] - ab[0] * ac[2],
                      ab[0] * ac[1] - ab[1] * ac[0]};
              const double area2 = norm(nrm);
              if (area2 <= 0) return;
              InterfaceElement el;
              el.measure = 0.5 * area2;
              el.midpoint = {(A[0] + B[0] + C[0]) / 3.0, (A[1] + B[1] + C[1]) / 3.0,
                             (A[2] + B[2] + C[2]) / 3.0};
              el.normal = scaled(nrm, 1.0 / area2);
              orient_normal(u, el.midpoint, el.normal);
              out.elements.push_back(el);
              out.total_measure += el.measure;
            };
            if (npts == 3) emit_tri(pts[0], pts[1], pts[2]);
            if (npts == 4) {
              emit_tri(pts[0], pts[1], pts[2]);
              emit_tri(pts[0], pts[2], pts[3]);
            }
          }
        }
  }
  require(!out.elements.empty(), "extract_interface: empty level set");
  return out;
}

}  // namespace anisoac
