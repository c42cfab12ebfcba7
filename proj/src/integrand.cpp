#include "anisoac/integrand.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace anisoac {

IntegrandSpec IntegrandSpec::isotropic(int dim) {
  IntegrandSpec s;
  s.family_ = Family::isotropic;
  s.dim_ = dim;
  s.A_ = zero_mat();
  for (int a = 0; a < dim; ++a) s.A_[a][a] = 1.0;
  require(dim >= 1 && dim <= 3, "IntegrandSpec: dim must be 1..3");
  return s;
}

IntegrandSpec IntegrandSpec::quadratic(int dim, const Mat& A) {
  IntegrandSpec s = isotropic(dim);
  s.family_ = Family::quadratic;
  s.A_ = A;
  for (int a = 0; a < dim; ++a) {
    require(A[a][a] > 0, "IntegrandSpec: A must be positive definite");
    for (int b = 0; b < dim; ++b)
      require(std::abs(A[a][b] - A[b][a]) < 1e-14, "IntegrandSpec: A must be symmetric");
  }
  return s;
}

IntegrandSpec IntegrandSpec::quartic_mixture(int dim, double beta) {
  IntegrandSpec s = isotropic(dim);
  s.family_ = Family::quartic_mixture;
  s.beta_ = beta;
  require(beta >= 0, "IntegrandSpec: beta must be nonnegative");
  return s;
}

IntegrandSpec& IntegrandSpec::with_modulation(double amp, std::array<double, 3> lengths) {
  require(std::abs(amp) < 1.0, "IntegrandSpec: |modulation| must be below 1");
  mod_amp_ = amp;
  lengths_ = lengths;
  return *this;
}

std::string IntegrandSpec::family_name() const {
  switch (family_) {
    case Family::isotropic: return "isotropic";
    case Family::quadratic: return "quadratic";
    default: return "quartic-mixture";
  }
}

double IntegrandSpec::modulation(const Vec& x) const {
  if (mod_amp_ == 0.0) return 1.0;
  double p = 1.0;
  for (int a = 0; a < dim_; ++a)
    p *= std::cos(2.0 * std::numbers::pi * x[a] / lengths_[a]);
  return 1.0 + mod_amp_ * p;
}

double IntegrandSpec::fsq_base(const Vec& v) const {
  switch (family_) {
    case Family::isotropic:
      return dot(v, v);
    case Family::quadratic:
      return dot(v, matvec(A_, v));
    default: {
      const double n2 = dot(v, v);
      double q4 = 0;
      for (int a = 0; a < dim_; ++a) q4 += v[a] * v[a] * v[a] * v[a];
      return std::sqrt(n2 * n2 + beta_ * q4);
    }
  }
}

double IntegrandSpec::f_base(const Vec& v) const { return std::sqrt(fsq_base(v)); }

Vec IntegrandSpec::dfsq_base(const Vec& v) const {
  switch (family_) {
    case Family::isotropic:
      return scaled(v, 2.0);
    case Family::quadratic:
      return scaled(matvec(A_, v), 2.0);
    default: {
      const double S = fsq_base(v);
      if (S <= 0) return Vec{};
      const double n2 = dot(v, v);
      Vec dQ{};
      for (int a = 0; a < dim_; ++a)
        dQ[a] = 4.0 * n2 * v[a] + 4.0 * beta_ * v[a] * v[a] * v[a];
      return scaled(dQ, 0.5 / S);
    }
  }
}

Mat IntegrandSpec::d2fsq_base(const Vec& v) const {
  Mat H = zero_mat();
  switch (family_) {
    case Family::isotropic:
    case Family::quadratic:
      for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b) H[a][b] = 2.0 * A_[a][b];
      return H;
    default: {
      const double Q = fsq_base(v) * fsq_base(v);
      require(Q > 0, "d2fsq: Hessian undefined at the origin for this family");
      const double S = std::sqrt(Q);
      const double n2 = dot(v, v);
      Vec dQ{};
      for (int a = 0; a < dim_; ++a)
        dQ[a] = 4.0 * n2 * v[a] + 4.0 * beta_ * v[a] * v[a] * v[a];
      for (int a = 0; a < dim_; ++a) {
        for (int b = 0; b < dim_; ++b) {
          double d2Q = 8.0 * v[a] * v[b];
          if (a == b) d2Q += 4.0 * n2 + 12.0 * beta_ * v[a] * v[a];
          H[a][b] = -0.25 * dQ[a] * dQ[b] / (S * Q) + 0.5 * d2Q / S;
        }
      }
      return H;
    }
  }
}

FEval f_eval(const IntegrandSpec& spec, const Vec& x, const Vec& v, bool want_hess) {
  for (int a = 0; a < spec.dim(); ++a) require_finite(v[a], "f_eval: v");
  const double m = spec.modulation(x);
  const double m2 = m * m;
  FEval out;
  out.F = m * spec.f_base(v);
  out.dFsq = scaled(spec.dfsq_base(v), m2);
  if (want_hess) {
    const bool at_origin = dot(v, v) == 0.0;
    if (at_origin && !spec.quadratic_form())
      throw std::invalid_argument("f_eval: D^2F^2 undefined at v=0 for this family");
    out.d2Fsq = spec.d2fsq_base(v);
    for (auto& row : out.d2Fsq)
      for (auto& e : row) e *= m2;
    out.has_hess = true;
  }
  return out;
}

// --- mollification ----------------------------------------------------------

namespace {
double bump(const Vec& y) {
  const double r2 = dot(y, y);
  if (r2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r2));
}

// Convolution of F^2 with the normalized bump at center y, |y| < 1, by
// coordinates centered at the kink of F^2: the integrand r^2 F^2(zhat) is
// smooth there, so fixed-order quadrature is accurate where the generic
// product rule is not. Used for the inner tabulation only.
double conv_kink(const IntegrandSpec& spec, const Vec& y, int order) {
  const int dim = spec.dim();
  const GaussLegendre gl(2 * order);
  // true bump mass by the radial profile
  static const auto radial_mass = [](int n, const GaussLegendre& g) {
    std::vector<double> r, wr;
    g.mapped(0.0, 1.0, r, wr);
    double m = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double b = std::exp(-1.0 / (1.0 - r[i] * r[i]));
      if (n == 1) m += 2.0 * wr[i] * b;
      if (n == 2) m += 2.0 * std::numbers::pi * wr[i] * r[i] * b;
      if (n == 3) m += 4.0 * std::numbers::pi * wr[i] * r[i] * r[i] * b;
    }
    return m;
  };
  const double mass = radial_mass(dim, gl);

  if (dim == 1) {
    double acc = 0;
    std::vector<double> z, wz;
    for (int seg = 0; seg < 2; ++seg) {
      const double a = seg == 0 ? y[0] - 1.0 : 0.0;
      const double b = seg == 0 ? 0.0 : y[0] + 1.0;
      if (b <= a) continue;
      gl.mapped(a, b, z, wz);
      for (std::size_t i = 0; i < z.size(); ++i)
        acc += wz[i] * spec.fsq_base({z[i], 0, 0}) * bump({y[0] - z[i], 0, 0});
    }
    return acc / mass;
  }

  const double y2 = dot(y, y);
  std::vector<double> r, wr;
  double acc = 0;
  if (dim == 2) {
    const int nth = 8 * order;
    for (int j = 0; j < nth; ++j) {
      const double th = 2.0 * std::numbers::pi * (j + 0.5) / nth;
      const Vec zh{std::cos(th), std::sin(th), 0};
      const double yz = dot(y, zh);
      const double R = yz + std::sqrt(std::max(0.0, yz * yz + 1.0 - y2));
      if (R <= 0) continue;
      gl.mapped(0.0, R, r, wr);
      const double f2 = spec.fsq_base(zh);
      double seg = 0;
      for (std::size_t i = 0; i < r.size(); ++i)
        seg += wr[i] * r[i] * r[i] * r[i] *
               bump({y[0] - r[i] * zh[0], y[1] - r[i] * zh[1], 0});
      acc += seg * f2 * (2.0 * std::numbers::pi / nth);
    }
    return acc / mass;
  }

  const int nph = 4 * order;
  std::vector<double> ct, wct;
  gl.mapped(-1.0, 1.0, ct, wct);
  for (std::size_t a = 0; a < ct.size(); ++a) {
    const double c = ct[a];
    const double w_c = wct[a];
    const double st = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int b = 0; b < nph; ++b) {
      const double ph = 2.0 * std::numbers::pi * (b + 0.5) / nph;
      const Vec zh{st * std::cos(ph), st * std::sin(ph), c};
      const double yz = dot(y, zh);
      const double R = yz + std::sqrt(std::max(0.0, yz * yz + 1.0 - y2));
      if (R <= 0) continue;
      gl.mapped(0.0, R, r, wr);
      const double f2 = spec.fsq_base(zh);
      double seg = 0;
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double rr = r[i];
        seg += wr[i] * rr * rr * rr * rr *
               bump({y[0] - rr * zh[0], y[1] - rr * zh[1], y[2] - rr * zh[2]});
      }
      acc += seg * f2 * w_c * (2.0 * std::numbers::pi / nph);
    }
  }
  return acc / mass;
}

// C^2 smoothstep on [0,1].
inline double smooth01(double t, double& d1, double& d2) {
  if (t <= 0) {
    d1 = d2 = 0;
    return 0;
  }
  if (t >= 1) {
    d1 = d2 = 0;
    return 1;
  }
  d1 = 30 * t * t * (t - 1) * (t - 1);
  d2 = 60 * t * (t - 1) * (2 * t - 1);
  return t * t * t * (10 + t * (-15 + 6 * t));
}
}  // namespace

MollifiedIntegrand::MollifiedIntegrand(const IntegrandSpec& spec, double delta,
                                       int quad_order, bool build_table)
    : spec_(&spec), delta_(delta), quad_order_(quad_order) {
  require(delta > 0 && delta < 1, "mollify: delta must lie in (0,1)");
  require(quad_order >= 4, "mollify: quadrature order below 4 per axis rejected");

  // antipodally symmetrized rule: odd moments vanish exactly, so the smoothed
  // square stays even and its differential vanishes at the origin
  const BallRule rule(spec.dim(), quad_order);
  double mass = 0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const double w = 0.5 * rule.weights[q] * bump(rule.points[q]);
    if (w <= 0) continue;
    for (double sgn : {1.0, -1.0}) {
      nodes_.push_back(scaled(rule.points[q], sgn));
      offsets_.push_back(scaled(rule.points[q], sgn * delta));
      weights_.push_back(w);
      mass += w;
    }
  }
  for (auto& w : weights_) w /= mass;

  if (build_table && !spec.quadratic_form()) {
    table_extent_ = 3.2;
    table_h_ = spec.dim() == 1 ? 0.005 : (spec.dim() == 2 ? 0.02 : 0.1);
    const int npts = 2 * int(std::round(table_extent_ / table_h_)) + 1;
    table_n_ = {1, 1, 1};
    for (int a = 0; a < spec.dim(); ++a) table_n_[a] = npts;
    std::vector<double> vals(std::size_t(table_n_[0]) * table_n_[1] * table_n_[2], 0.0);
    // tabulate G_1 with the same rule (scaling identity then holds exactly)
    const double base0 = [&] {
      double s = 0;
      for (std::size_t q = 0; q < nodes_.size(); ++q)
        s += weights_[q] * spec.fsq_base(scaled(nodes_[q], -1.0));
      return s;
    }();
    // Inside the mollifier support the generic rule straddles the kink of
    // F^2 and its values carry ~1e-4 noise that a spline would amplify into
    // third-derivative wiggles; there the kink-centered rule takes over,
    // blended back into the generic values where the bump weight of the kink
    // is already negligible.
    const double kink0 = conv_kink(spec, Vec{}, std::max(quad_order, 8));
    for (int i = 0; i < table_n_[0]; ++i)
      for (int j = 0; j < table_n_[1]; ++j)
        for (int k = 0; k < table_n_[2]; ++k) {
          const Vec y{-table_extent_ + i * table_h_,
                      spec.dim() >= 2 ? -table_extent_ + j * table_h_ : 0.0,
                      spec.dim() >= 3 ? -table_extent_ + k * table_h_ : 0.0};
          double s = 0;
          for (std::size_t q = 0; q < nodes_.size(); ++q)
            s += weights_[q] * spec.fsq_base(minus(y, nodes_[q]));
          double val = s - base0;
          const double ny = norm(y);
          if (ny < 0.98) {
            const double kv = conv_kink(spec, y, std::max(quad_order, 8)) - kink0;
            double b1, b2;
            const double wk = 1.0 - smooth01((ny - 0.85) / 0.13, b1, b2);
            val = wk * kv + (1.0 - wk) * val;
          }
          vals[(std::size_t(i) * table_n_[1] + j) * table_n_[2] + k] = val;
        }

    // The fixed-order rule leaves ~1e-5 noise in the values where the kink of
    // F^2 sits inside the mollifier support (|y| < 1); a spline would amplify
    // it to O(noise/h^3) wiggles in the third derivative and degrade the
    // difference-quotient certificates downstream. Filter with 2K - K^2 for a
    // binomial kernel K: grid-frequency noise is annihilated while smooth
    // components are kept to fourth order.
    {
      const int m0 = table_n_[0], m1 = table_n_[1], m2 = table_n_[2];
      const auto kpass = [&](std::vector<double>& src) {
        for (int axis = 0; axis < spec.dim(); ++axis) {
          std::vector<double> dst(src.size());
          for (int i = 0; i < m0; ++i)
            for (int j = 0; j < m1; ++j)
              for (int k = 0; k < m2; ++k) {
                auto at = [&](int s) {
                  int ii = i, jj = j, kk = k;
                  (axis == 0 ? ii : (axis == 1 ? jj : kk)) = std::clamp(
                      (axis == 0 ? i : (axis == 1 ? j : k)) + s, 0,
                      table_n_[axis] - 1);
                  return src[(std::size_t(ii) * m1 + jj) * m2 + kk];
                };
                dst[(std::size_t(i) * m1 + j) * m2 + k] =
                    (at(-2) + 4 * at(-1) + 6 * at(0) + 4 * at(1) + at(2)) / 16.0;
              }
          src = std::move(dst);
        }
      };
      std::vector<double> v1 = vals;
      kpass(v1);
      std::vector<double> v2 = v1;
      kpass(v2);
      for (std::size_t q = 0; q < vals.size(); ++q) vals[q] = 2.0 * v1[q] - v2[q];
    }

    // separable cubic B-spline fit with natural ends; evaluation is then C^2,
    // which the exact-derivative certificates of the energy rely on
    const auto solve_line = [](std::vector<double>& y) {
      const int n = int(y.size());
      std::vector<double> c(std::size_t(n), 0.0);
      c[0] = y[0];
      c[std::size_t(n - 1)] = y[std::size_t(n - 1)];
      // Thomas on rows 1..n-2 of (1,4,1)/6 with Dirichlet-like end rows
      std::vector<double> d(std::size_t(n), 4.0);
      std::vector<double> rhs(std::size_t(n), 0.0);
      for (int i = 1; i < n - 1; ++i) rhs[std::size_t(i)] = 6.0 * y[std::size_t(i)];
      rhs[1] -= c[0];
      rhs[std::size_t(n - 2)] -= c[std::size_t(n - 1)];
      for (int i = 2; i < n - 1; ++i) {
        const double m = 1.0 / d[std::size_t(i - 1)];
        d[std::size_t(i)] -= m;
        rhs[std::size_t(i)] -= m * rhs[std::size_t(i - 1)];
      }
      for (int i = n - 2; i >= 1; --i) {
        const double upper = (i == n - 2) ? 0.0 : c[std::size_t(i + 1)];
        c[std::size_t(i)] = (rhs[std::size_t(i)] - upper) / d[std::size_t(i)];
      }
      y = std::move(c);
    };

    const int n0 = table_n_[0], n1 = table_n_[1], n2 = table_n_[2];
    std::vector<double> line;
    for (int axis = 0; axis < spec.dim(); ++axis) {
      const int na = table_n_[axis];
      for (int j = 0; j < (axis == 0 ? n1 : n0); ++j)
        for (int k = 0; k < (axis == 2 ? n1 : n2); ++k) {
          line.resize(std::size_t(na));
          for (int i = 0; i < na; ++i) {
            const int ii = axis == 0 ? i : j;
            const int jj = axis == 0 ? j : (axis == 1 ? i : k);
            const int kk = axis == 2 ? i : k;
            line[std::size_t(i)] = vals[(std::size_t(ii) * n1 + jj) * n2 + kk];
          }
          solve_line(line);
          for (int i = 0; i < na; ++i) {
            const int ii = axis == 0 ? i : j;
            const int jj = axis == 0 ? j : (axis == 1 ? i : k);
            const int kk = axis == 2 ? i : k;
            vals[(std::size_t(ii) * n1 + jj) * n2 + kk] = line[std::size_t(i)];
          }
        }
    }

    // store with one ghost per side (natural end condition: c_-1 = 2c_0 - c_1),
    // filled axis by axis so the corners resolve by repeated extrapolation
    const int g0 = n0 + 2;
    const int g1 = n1 + (spec.dim() > 1 ? 2 : 0);
    const int g2 = n2 + (spec.dim() > 2 ? 2 : 0);
    coef_.assign(std::size_t(g0) * g1 * g2, 0.0);
    const int o1 = spec.dim() > 1 ? 1 : 0, o2 = spec.dim() > 2 ? 1 : 0;
    auto C = [&](int i, int j, int k) -> double& {
      return coef_[(std::size_t(i) * g1 + j) * g2 + k];
    };
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j < n1; ++j)
        for (int k = 0; k < n2; ++k)
          C(i + 1, j + o1, k + o2) = vals[(std::size_t(i) * n1 + j) * n2 + k];
    for (int j = 0; j < g1; ++j)
      for (int k = 0; k < g2; ++k) {
        C(0, j, k) = 2 * C(1, j, k) - C(2, j, k);
        C(g0 - 1, j, k) = 2 * C(g0 - 2, j, k) - C(g0 - 3, j, k);
      }
    if (spec.dim() > 1)
      for (int i = 0; i < g0; ++i)
        for (int k = 0; k < g2; ++k) {
          C(i, 0, k) = 2 * C(i, 1, k) - C(i, 2, k);
          C(i, g1 - 1, k) = 2 * C(i, g1 - 2, k) - C(i, g1 - 3, k);
        }
    if (spec.dim() > 2)
      for (int i = 0; i < g0; ++i)
        for (int j = 0; j < g1; ++j) {
          C(i, j, 0) = 2 * C(i, j, 1) - C(i, j, 2);
          C(i, j, g2 - 1) = 2 * C(i, j, g2 - 2) - C(i, j, g2 - 3);
        }
    has_table_ = true;
    table_zero_ = g_table(Vec{}, false).G;  // anchor so G(0) is exactly zero
  }
}

double MollifiedIntegrand::coef_at(int i, int j, int k) const {
  const int g0 = table_n_[0] + 2;
  const int g1 = table_n_[1] + (spec_->dim() > 1 ? 2 : 0);
  const int g2 = table_n_[2] + (spec_->dim() > 2 ? 2 : 0);
  i = std::clamp(i + 1, 0, g0 - 1);
  j = std::clamp(j + (spec_->dim() > 1 ? 1 : 0), 0, g1 - 1);
  k = std::clamp(k + (spec_->dim() > 2 ? 1 : 0), 0, g2 - 1);
  return coef_[(std::size_t(i) * g1 + j) * g2 + k];
}

// Uniform cubic B-spline basis on the 4-point stencil, plus derivatives.
namespace {
inline void bs_weights(double f, double w[4], double dw[4], double d2w[4]) {
  const double f2 = f * f, f3 = f2 * f, g = 1 - f;
  w[0] = g * g * g / 6.0;
  w[1] = (3 * f3 - 6 * f2 + 4) / 6.0;
  w[2] = (-3 * f3 + 3 * f2 + 3 * f + 1) / 6.0;
  w[3] = f3 / 6.0;
  dw[0] = -0.5 * g * g;
  dw[1] = 0.5 * (3 * f2 - 4 * f);
  dw[2] = 0.5 * (-3 * f2 + 2 * f + 1);
  dw[3] = 0.5 * f2;
  d2w[0] = g;
  d2w[1] = 3 * f - 2;
  d2w[2] = -3 * f + 1;
  d2w[3] = f;
}
}  // namespace

GEval MollifiedIntegrand::g_table(const Vec& y, bool want_hess) const {
  const int dim = spec_->dim();
  int base[3] = {0, 0, 0};
  double w[3][4], dw[3][4], d2w[3][4];
  for (int a = 0; a < 3; ++a)
    for (int s = 0; s < 4; ++s) {
      w[a][s] = (s == 1) ? 1.0 : 0.0;  // identity weights on unused axes
      dw[a][s] = d2w[a][s] = 0.0;
    }
  for (int a = 0; a < dim; ++a) {
    const double t = (y[a] + table_extent_) / table_h_;
    const double fl = std::floor(t);
    base[a] = int(fl);
    bs_weights(t - fl, w[a], dw[a], d2w[a]);
  }
  GEval out;
  for (int si = 0; si < 4; ++si)
    for (int sj = 0; sj < (dim >= 2 ? 4 : 1); ++sj)
      for (int sk = 0; sk < (dim >= 3 ? 4 : 1); ++sk) {
        const double val = coef_at(base[0] + si - 1,
                                   dim >= 2 ? base[1] + sj - 1 : 0,
                                   dim >= 3 ? base[2] + sk - 1 : 0);
        const double wj = dim >= 2 ? w[1][sj] : 1.0;
        const double wk = dim >= 3 ? w[2][sk] : 1.0;
        out.G += w[0][si] * wj * wk * val;
        out.dG[0] += dw[0][si] * wj * wk * val;
        if (dim >= 2) out.dG[1] += w[0][si] * dw[1][sj] * wk * val;
        if (dim >= 3) out.dG[2] += w[0][si] * wj * dw[2][sk] * val;
        if (want_hess) {
          out.d2G[0][0] += d2w[0][si] * wj * wk * val;
          if (dim >= 2) {
            out.d2G[1][1] += w[0][si] * d2w[1][sj] * wk * val;
            out.d2G[0][1] += dw[0][si] * dw[1][sj] * wk * val;
          }
          if (dim >= 3) {
            out.d2G[2][2] += w[0][si] * wj * d2w[2][sk] * val;
            out.d2G[0][2] += dw[0][si] * wj * dw[2][sk] * val;
            out.d2G[1][2] += w[0][si] * dw[1][sj] * dw[2][sk] * val;
          }
        }
      }
  // subtract after accumulating so the origin value cancels bit-exactly
  out.G -= table_zero_;
  const double ih = 1.0 / table_h_;
  for (int a = 0; a < 3; ++a) out.dG[a] *= ih;
  if (want_hess) {
    out.d2G[1][0] = out.d2G[0][1];
    out.d2G[2][0] = out.d2G[0][2];
    out.d2G[2][1] = out.d2G[1][2];
    for (auto& row : out.d2G)
      for (auto& e : row) e *= ih * ih;
  }
  return out;
}

GEval MollifiedIntegrand::g_quadrature(const Vec& v, bool want_hess) const {
  GEval out;
  for (std::size_t q = 0; q < offsets_.size(); ++q) {
    const Vec arg = minus(v, offsets_[q]);
    const Vec arg0 = scaled(offsets_[q], -1.0);
    out.G += weights_[q] * (spec_->fsq_base(arg) - spec_->fsq_base(arg0));
    const Vec d = spec_->dfsq_base(arg);
    for (int a = 0; a < 3; ++a) out.dG[a] += weights_[q] * d[a];
    if (want_hess) {
      if (dot(arg, arg) < 1e-24) continue;  // measure-zero kink of D^2F^2
      const Mat H = spec_->d2fsq_base(arg);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) out.d2G[a][b] += weights_[q] * H[a][b];
    }
  }
  return out;
}

GEval MollifiedIntegrand::g_base(const Vec& v, bool want_hess) const {
  if (spec_->quadratic_form()) {
    GEval out;
    const Mat& A = spec_->matrix();
    out.G = dot(v, matvec(A, v));
    out.dG = scaled(matvec(A, v), 2.0);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) out.d2G[a][b] = 2.0 * A[a][b];
    return out;
  }
  if (!has_table_) return g_quadrature(v, want_hess);

  // wide blend band: the cross terms of the blended derivatives scale with
  // inverse powers of the band width against the (tiny) branch mismatch
  const double r = norm(v) / delta_;
  constexpr double lo = 1.4, hi = 2.0;
  if (r <= lo) {
    GEval t = g_table(scaled(v, 1.0 / delta_), want_hess);
    GEval out;
    out.G = delta_ * delta_ * t.G;
    out.dG = scaled(t.dG, delta_);
    out.d2G = t.d2G;
    return out;
  }
  if (r >= hi) return g_quadrature(v, want_hess);

  // C^1 blend between the two branches; all terms of the derivative of the
  // blended expression are kept so gradients stay exact.
  GEval tq = g_quadrature(v, want_hess);
  GEval tt = g_table(scaled(v, 1.0 / delta_), want_hess);
  GEval gt;
  gt.G = delta_ * delta_ * tt.G;
  gt.dG = scaled(tt.dG, delta_);
  gt.d2G = tt.d2G;

  const double rn = (r - lo) / (hi - lo);
  double b1, b2;
  const double b = smooth01(rn, b1, b2);
  const double nv = norm(v);
  const double scale = 1.0 / (delta_ * (hi - lo));
  Vec grad_rn = scaled(v, scale / nv);
  GEval out;
  out.G = (1 - b) * gt.G + b * tq.G;
  const double dGdiff = tq.G - gt.G;
  for (int a = 0; a < 3; ++a)
    out.dG[a] = (1 - b) * gt.dG[a] + b * tq.dG[a] + b1 * grad_rn[a] * dGdiff;
  if (want_hess) {
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) {
        double hrn = -v[a] * v[c] / (nv * nv * nv) * scale;
        if (a == c) hrn += scale / nv;
        out.d2G[a][c] = (1 - b) * gt.d2G[a][c] + b * tq.d2G[a][c] +
                        b1 * grad_rn[a] * (tq.dG[c] - gt.dG[c]) +
                        b1 * grad_rn[c] * (tq.dG[a] - gt.dG[a]) +
                        (b2 * grad_rn[a] * grad_rn[c] + b1 * hrn) * dGdiff;
      }
  }
  return out;
}

GEval MollifiedIntegrand::g_eval(const Vec& x, const Vec& v, bool want_hess) const {
  for (int a = 0; a < spec_->dim(); ++a) require_finite(v[a], "g_eval: v");
  GEval out = g_base(v, want_hess);
  const double m = spec_->modulation(x);
  const double m2 = m * m;
  if (m2 != 1.0) {
    out.G *= m2;
    out.dG = scaled(out.dG, m2);
    for (auto& row : out.d2G)
      for (auto& e : row) e *= m2;
  }
  return out;
}

MollifiedIntegrand mollify(const IntegrandSpec& spec, double delta, int quad_order) {
  return MollifiedIntegrand(spec, delta, quad_order);
}

// --- audit ------------------------------------------------------------------

namespace {
double min_eig_sym(const Mat& H, int dim) {
  Eigen::MatrixXd M(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) M(a, b) = 0.5 * (H[a][b] + H[b][a]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  return es.eigenvalues().minCoeff();
}
}  // namespace

IntegrandAudit audit_integrand(const IntegrandSpec& spec, int samples,
                               std::uint64_t seed, const MollifiedIntegrand* moll) {
  IntegrandAudit a;
  std::mt19937_64 rng(seed);
  const int dim = spec.dim();

  std::unique_ptr<MollifiedIntegrand> tmp;
  if (!moll) {
    tmp = std::make_unique<MollifiedIntegrand>(spec, 0.1, 8, /*build_table=*/false);
    moll = tmp.get();
  }
  const double delta = moll->delta();

  std::vector<Vec> dirs;
  for (int axi = 0; axi < dim; ++axi) {
    Vec e{};
    e[axi] = 1.0;
    dirs.push_back(e);
  }
  for (int s = 0; s < samples; ++s) dirs.push_back(random_unit(rng, dim));

  double lam = std::numeric_limits<double>::infinity();
  double lamp = std::numeric_limits<double>::infinity();
  double min_eig = std::numeric_limits<double>::infinity();
  for (const Vec& v : dirs) {
    Vec x{};
    for (int c = 0; c < dim; ++c) x[c] = uniform(rng, 0.0, 1.0);
    const double F = spec.F(x, v);
    if (!(F > 0)) {
      a.ok = false;
      a.failures.push_back("F <= 0 at a unit vector");
      continue;
    }
    lam = std::min({lam, F, 1.0 / F});

    // orthoradial convexity of F: D2F = D2(F^2)/(2F) - DF x DF / F with
    // DF = D(F^2)/(2F); tested against tangential directions
    if (dim >= 2) {
      const FEval fe = f_eval(spec, x, v, true);
      Vec w = random_unit(rng, dim);
      const double c = dot(w, v);
      for (int q = 0; q < 3; ++q) w[q] -= c * v[q];
      const double nw = norm(w);
      if (nw > 1e-6) {
        w = scaled(w, 1.0 / nw);
        const Vec dF = scaled(fe.dFsq, 0.5 / fe.F);
        double d2F = 0;
        for (int p = 0; p < dim; ++p)
          for (int q = 0; q < dim; ++q) d2F += fe.d2Fsq[p][q] * w[p] * w[q];
        d2F = d2F / (2.0 * fe.F) - dot(dF, w) * dot(dF, w) / fe.F;
        if (d2F <= 0) {
          a.ok = false;
          a.failures.push_back("orthoradial convexity D2F(v)[w,w] <= 0 at a sample");
        }
        lam = std::min(lam, d2F);
      }
    }

    // evenness and homogeneity
    const Vec mv = scaled(v, -1.0);
    a.worst_evenness = std::max(a.worst_evenness, std::abs(spec.F(x, v) - spec.F(x, mv)));
    for (double tau : {0.0, 0.37, 1.7, 12.0}) {
      const Vec tv = scaled(v, tau);
      const double resid =
          std::abs(spec.F(x, tv) - tau * spec.F(x, v)) / ((1.0 + tau) * 1.0);
      a.worst_homogeneity = std::max(a.worst_homogeneity, resid);
    }

    // mollified ellipticity: bound for F_delta = sqrt(G_delta) and convexity
    // of G_delta, sampled over several radii
    for (double scale : {0.3 * delta, delta, 2.5 * delta, 1.0, 2.0}) {
      const Vec sv = scaled(v, scale);
      const GEval ge = moll->g_base(sv, true);
      if (ge.G > 0) {
        const double Fd = std::sqrt(ge.G);
        lamp = std::min({lamp, Fd / scale, scale / Fd});
      }
      const double me = min_eig_sym(ge.d2G, dim);
      min_eig = std::min(min_eig, me);
      if (me <= 0) {
        a.ok = false;
        a.failures.push_back("D^2 G_delta not positive definite at |v|=" +
                             std::to_string(scale));
      }
    }
  }
  a.lambda_est = lam;
  a.min_d2g_eig = min_eig;
  a.lambda_prime_est = std::min({lamp, 0.5 * min_eig, a.lambda_est});
  if (!(a.lambda_est > 0)) {
    a.ok = false;
    a.failures.push_back("lambda estimate not positive");
  }
  return a;
}

}  // namespace anisoac
