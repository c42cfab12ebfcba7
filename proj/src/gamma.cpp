#include "anisoac/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "anisoac/quadrature.hpp"

namespace anisoac {

ShapeSpec ShapeSpec::stripe(int axis, double center, double width) {
  ShapeSpec s;
  s.kind = Kind::stripe;
  s.axis = axis;
  s.center1 = center;
  s.width = width;
  require(width > 0, "ShapeSpec: stripe width must be positive");
  return s;
}

ShapeSpec ShapeSpec::ball(const Vec& center, double r) {
  ShapeSpec s;
  s.kind = Kind::ball;
  s.center = center;
  s.radius = r;
  require(r > 0, "ShapeSpec: radius must be positive");
  return s;
}

ShapeSpec ShapeSpec::ellipse(const Vec& center, double a, double b) {
  ShapeSpec s;
  s.kind = Kind::ellipse;
  s.center = center;
  s.semi_axes = {a, b, 0};
  require(a > 0 && b > 0, "ShapeSpec: semi-axes must be positive");
  return s;
}

void ShapeSpec::project(const Grid& g, const Vec& x, double& dist, Vec& bdry,
                        Vec& nu) const {
  switch (kind) {
    case Kind::stripe: {
      const double d = g.per_delta(center1, x[axis], axis);  // signed offset
      dist = std::abs(d) - 0.5 * width;
      bdry = x;
      bdry[axis] = center1 + (d >= 0 ? 0.5 : -0.5) * width;
      bdry[axis] -= g.lengths[axis] * std::floor(bdry[axis] / g.lengths[axis]);
      nu = Vec{};
      nu[axis] = d >= 0 ? 1.0 : -1.0;
      return;
    }
    case Kind::ball: {
      Vec off{};
      for (int a = 0; a < g.dim; ++a) off[a] = g.per_delta(center[a], x[a], a);
      const double r = norm(off);
      if (r < 1e-14) {
        nu = Vec{};
        nu[0] = 1.0;
      } else {
        nu = scaled(off, 1.0 / r);
      }
      dist = r - radius;
      for (int a = 0; a < g.dim; ++a) bdry[a] = center[a] + radius * nu[a];
      return;
    }
    default: {
      require(g.dim == 2, "ShapeSpec: ellipse needs a 2D grid");
      const double a = semi_axes[0], b = semi_axes[1];
      Vec off{};
      for (int c = 0; c < 2; ++c) off[c] = g.per_delta(center[c], x[c], c);
      // nearest boundary parameter by damped Newton on
      // f(th) = (p(th) - off) . p'(th) with a coarse scan start
      double best_th = 0, best_d2 = std::numeric_limits<double>::infinity();
      for (int s = 0; s < 64; ++s) {
        const double th = 2.0 * std::numbers::pi * s / 64.0;
        const double dx = a * std::cos(th) - off[0], dy = b * std::sin(th) - off[1];
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
          best_d2 = d2;
          best_th = th;
        }
      }
      double th = best_th;
      for (int it = 0; it < 60; ++it) {
        const double ct = std::cos(th), st = std::sin(th);
        const double px = a * ct - off[0], py = b * st - off[1];
        const double f = -px * a * st + py * b * ct;
        const double fp = a * a * st * st - px * a * ct + b * b * ct * ct - py * b * st;
        if (std::abs(fp) < 1e-30) break;
        const double step = f / fp;
        th -= step;
        if (std::abs(step) < 1e-14) break;
      }
      const double ct = std::cos(th), st = std::sin(th);
      bdry = {center[0] + a * ct, center[1] + b * st, 0};
      nu = {b * ct, a * st, 0};
      const double nn = norm(nu);
      nu = scaled(nu, 1.0 / nn);
      const double inside = off[0] * off[0] / (a * a) + off[1] * off[1] / (b * b) - 1.0;
      const double d = std::hypot(a * ct - off[0], b * st - off[1]);
      dist = inside >= 0 ? d : -d;
      return;
    }
  }
}

double ShapeSpec::reach(const Grid& g) const {
  double min_len = g.lengths[0];
  for (int a = 1; a < g.dim; ++a) min_len = std::min(min_len, g.lengths[a]);
  switch (kind) {
    case Kind::stripe:
      return 0.5 * std::min(width, g.lengths[axis] - width);
    case Kind::ball:
      return std::min(radius, 0.5 * min_len - radius);
    default: {
      const double a = std::max(semi_axes[0], semi_axes[1]);
      const double b = std::min(semi_axes[0], semi_axes[1]);
      return std::min(b * b / a, 0.5 * min_len - a);
    }
  }
}

// --- H transform ------------------------------------------------------------

namespace {
struct HTable {
  double t0 = -2.0, t1 = 2.0, dt = 0;
  std::vector<double> H, dH;

  explicit HTable(const PotentialSpec& spec) {
    const int n = 20001;
    H.assign(n, 0.0);
    dH.assign(n, 0.0);
    dt = (t1 - t0) / (n - 1);
    const int mid = (n - 1) / 2;
    auto f = [&](double s) { return std::sqrt(std::max(0.0, 2.0 * spec.W(s))); };
    for (int i = 0; i < n; ++i) dH[std::size_t(i)] = f(t0 + i * dt);
    for (int i = mid; i < n - 1; ++i) {
      const double a = t0 + i * dt;
      H[std::size_t(i + 1)] =
          H[std::size_t(i)] + integrate_adaptive(f, a, a + dt, 1e-13);
    }
    for (int i = mid; i > 0; --i) {
      const double a = t0 + i * dt;
      H[std::size_t(i - 1)] =
          H[std::size_t(i)] - integrate_adaptive(f, a - dt, a, 1e-13);
    }
  }

  double eval(double t) const {
    if (t <= t0) return H.front() + dH.front() * (t - t0);
    if (t >= t1) return H.back() + dH.back() * (t - t1);
    const double s = (t - t0) / dt;
    const std::size_t i = std::min(std::size_t(s), H.size() - 2);
    const double x = s - double(i);
    const double x2 = x * x, x3 = x2 * x;
    return (2 * x3 - 3 * x2 + 1) * H[i] + (x3 - 2 * x2 + x) * dt * dH[i] +
           (-2 * x3 + 3 * x2) * H[i + 1] + (x3 - x2) * dt * dH[i + 1];
  }
};

const HTable& shared_htable(const PotentialSpec& spec) {
  static std::mutex mu;
  static std::map<std::pair<int, std::vector<double>>, std::unique_ptr<HTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(int(spec.family()), spec.coeffs());
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(std::move(key), std::make_unique<HTable>(spec)).first;
  return *it->second;
}
}  // namespace

double h_eval(const PotentialSpec& spec, double t) { return shared_htable(spec).eval(t); }

ScalarField h_transform(const ScalarField& u, const PotentialSpec& spec) {
  const HTable& table = shared_htable(spec);
  ScalarField out(*u.grid);
  for (std::int64_t i = 0; i < u.size(); ++i) out[i] = table.eval(u[i]);
  return out;
}

double bv_mass_aniso(const ScalarField& w, const EnergyParams& p) {
  const Grid& g = *p.grid;
  const std::int64_t N = g.size();
  std::vector<double> acc(std::size_t(N), 0.0);
  for (std::int64_t i = 0; i < N; ++i) {
    const Vec d = p.du_at(w, i);
    acc[std::size_t(i)] = std::sqrt(p.sfac[std::size_t(i)]) * p.integrand->f_base(d) *
                          p.cellw[std::size_t(i)];
  }
  return pairwise_sum(acc);
}

// --- perimeter ---------------------------------------------------------------

double aniso_perimeter(const ShapeSpec& S, const Grid& g, const IntegrandSpec& F) {
  const double tol = 1e-9;
  switch (S.kind) {
    case ShapeSpec::Kind::stripe: {
      Vec nu{};
      nu[S.axis] = 1.0;
      double total = 0;
      for (double side : {-0.5, 0.5}) {
        double coord = S.center1 + side * S.width;
        coord -= g.lengths[S.axis] * std::floor(coord / g.lengths[S.axis]);
        if (g.dim == 1) {
          Vec x{};
          x[S.axis] = coord;
          total += F.F(x, nu);
        } else if (g.dim == 2) {
          const int other = 1 - S.axis;
          auto f = [&](double t) {
            Vec x{};
            x[S.axis] = coord;
            x[other] = t;
            return F.F(x, nu);
          };
          total += integrate_adaptive(f, 0.0, g.lengths[other], tol);
        } else {
          const int o1 = (S.axis + 1) % 3, o2 = (S.axis + 2) % 3;
          auto f = [&](double t1) {
            auto inner = [&](double t2) {
              Vec x{};
              x[S.axis] = coord;
              x[o1] = t1;
              x[o2] = t2;
              return F.F(x, nu);
            };
            return integrate_adaptive(inner, 0.0, g.lengths[o2], tol);
          };
          total += integrate_adaptive(f, 0.0, g.lengths[o1], tol);
        }
      }
      return total;
    }
    case ShapeSpec::Kind::ball: {
      if (g.dim == 2) {
        auto f = [&](double th) {
          const Vec nu{std::cos(th), std::sin(th), 0};
          const Vec x{S.center[0] + S.radius * nu[0], S.center[1] + S.radius * nu[1], 0};
          return F.F(x, nu) * S.radius;
        };
        return integrate_adaptive(f, 0.0, 2.0 * std::numbers::pi, tol);
      }
      require(g.dim == 3, "aniso_perimeter: ball needs dim 2 or 3");
      auto f = [&](double ct) {
        auto inner = [&](double ph) {
          const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
          const Vec nu{st * std::cos(ph), st * std::sin(ph), ct};
          const Vec x{S.center[0] + S.radius * nu[0], S.center[1] + S.radius * nu[1],
                      S.center[2] + S.radius * nu[2]};
          return F.F(x, nu) * S.radius * S.radius;
        };
        return integrate_adaptive(inner, 0.0, 2.0 * std::numbers::pi, tol);
      };
      return integrate_adaptive(f, -1.0, 1.0, tol);
    }
    default: {
      require(g.dim == 2, "aniso_perimeter: ellipse needs a 2D grid");
      const double a = S.semi_axes[0], b = S.semi_axes[1];
      // dH^1 = |p'(th)| dth and nu = n/|n| with n = (b cos, a sin), |n| = |p'|;
      // by 1-homogeneity F(nu) |p'| = F(n)
      auto f = [&](double th) {
        const Vec x{S.center[0] + a * std::cos(th), S.center[1] + b * std::sin(th), 0};
        const Vec n{b * std::cos(th), a * std::sin(th), 0};
        return F.F(x, n);
      };
      return integrate_adaptive(f, 0.0, 2.0 * std::numbers::pi, tol);
    }
  }
}

// --- recovery ----------------------------------------------------------------

ScalarField recovery_field(const ShapeSpec& S, const EnergyParams& p, double gamma) {
  const Grid& g = *p.grid;
  require(gamma > 0, "recovery_field: gamma must be positive");
  const Heteroclinic& het = shared_heteroclinic(*p.potential);

  // band must stay within reach of the boundary
  double Fmax = 0;
  {
    const int nprobe = 64;
    for (int s = 0; s < nprobe; ++s) {
      Vec x{}, bd{}, nu{};
      double dist;
      for (int a = 0; a < g.dim; ++a)
        x[a] = g.lengths[a] * (0.13 + 0.74 * double(s) / nprobe);
      S.project(g, x, dist, bd, nu);
      Fmax = std::max(Fmax, p.integrand->F(bd, nu));
    }
  }
  const double band = 2.0 * gamma * p.epsilon * Fmax;
  require(band < S.reach(g), "recovery_field: band exceeds the boundary reach");

  ScalarField u(g);
  const std::int64_t N = g.size();
  for (std::int64_t i = 0; i < N; ++i) {
    const Vec x = g.position(g.coords(i));
    double dist;
    Vec bd{}, nu{};
    S.project(g, x, dist, bd, nu);
    if (dist >= band) {
      u[i] = 1.0;
    } else if (dist <= -band) {
      u[i] = -1.0;
    } else {
      const double Floc = p.integrand->F(bd, nu);
      u[i] = truncated_profile(het, gamma, dist / (p.epsilon * Floc));
    }
  }
  return u;
}

GammaSweep gamma_sweep(const ShapeSpec& S, const Grid& g, const PotentialSpec& W,
                       const IntegrandSpec& F, const std::vector<double>& eps_list,
                       double gamma_fixed) {
  require(!eps_list.empty(), "gamma_sweep: empty eps list");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    require(eps_list[i] < eps_list[i - 1], "gamma_sweep: eps list must decrease");

  const double target = W.cw() * aniso_perimeter(S, g, F);
  const double reach = S.reach(g);

  GammaSweep out;
  for (double eps : eps_list) {
    EnergyParams p(g, W, F, eps, 0.0, nullptr, nullptr);
    double Fmax = 0;
    for (int s = 0; s < 64; ++s) {
      Vec x{}, bd{}, nu{};
      double dist;
      for (int a = 0; a < g.dim; ++a)
        x[a] = g.lengths[a] * (0.13 + 0.74 * double(s) / 64.0);
      S.project(g, x, dist, bd, nu);
      Fmax = std::max(Fmax, F.F(bd, nu));
    }
    double gamma = gamma_fixed > 0
                       ? gamma_fixed
                       : std::min(2.0 * std::log(1.0 / eps),
                                  0.45 * reach / (eps * Fmax));
    gamma = std::max(gamma, 0.5);
    const ScalarField u = recovery_field(S, p, gamma);
    GammaRow row;
    row.epsilon = eps;
    row.gamma = gamma;
    row.energy = energy(u, p);
    row.target = target;
    row.gap = std::abs(row.energy - target) / target;
    out.rows.push_back(row);
  }
  out.gaps_decreasing = true;
  for (std::size_t i = 1; i < out.rows.size(); ++i)
    if (out.rows[i].gap > 1.2 * out.rows[i - 1].gap) out.gaps_decreasing = false;
  return out;
}

}  // namespace anisoac
