#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "anisoac/util.hpp"

namespace anisoac {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> nodes, weights;

  explicit GaussLegendre(int n) {
    require(n >= 1, "GaussLegendre: order must be positive");
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  // Affine map to [a,b].
  void mapped(double a, double b, std::vector<double>& xs, std::vector<double>& ws) const {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    xs.resize(nodes.size());
    ws.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      xs[i] = mid + half * nodes[i];
      ws[i] = half * weights[i];
    }
  }
};

// Adaptive 1D quadrature (Gauss-Kronrod 15/31 with interval subdivision).
// Integrands may have isolated corners (e.g. sqrt of a glued well); the
// failure check therefore only rejects runs whose reported error is far off
// the requested tolerance.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol,
                          double* achieved_error = nullptr) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 15, abs_tol, &err);
  if (achieved_error) *achieved_error = err;
  if (!(err <= std::max(abs_tol * 1e4, 1e-9))) {
    throw std::runtime_error("integrate_adaptive: quadrature did not converge");
  }
  return v;
}

// Product quadrature over the unit ball in dim 1..3. Radial factor uses
// Gauss-Legendre on [0,1]; angles use Gauss-Legendre as well. Weights include
// the polar/spherical Jacobian but no density.
struct BallRule {
  std::vector<Vec> points;
  std::vector<double> weights;

  BallRule(int dim, int order) {
    require(dim >= 1 && dim <= 3, "BallRule: dim must be 1..3");
    require(order >= 4, "BallRule: order must be at least 4 per axis");
    const GaussLegendre gl(order);
    std::vector<double> r, wr;
    gl.mapped(0.0, 1.0, r, wr);
    if (dim == 1) {
      std::vector<double> x, wx;
      gl.mapped(-1.0, 1.0, x, wx);
      for (std::size_t i = 0; i < x.size(); ++i) {
        points.push_back({x[i], 0, 0});
        weights.push_back(wx[i]);
      }
    } else if (dim == 2) {
      std::vector<double> th, wth;
      gl.mapped(0.0, 2.0 * std::numbers::pi, th, wth);
      for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < th.size(); ++j) {
          points.push_back({r[i] * std::cos(th[j]), r[i] * std::sin(th[j]), 0});
          weights.push_back(wr[i] * wth[j] * r[i]);
        }
    } else {
      std::vector<double> ct, wct, ph, wph;
      gl.mapped(-1.0, 1.0, ct, wct);
      gl.mapped(0.0, 2.0 * std::numbers::pi, ph, wph);
      for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < ct.size(); ++j)
          for (std::size_t k = 0; k < ph.size(); ++k) {
            const double st = std::sqrt(std::max(0.0, 1.0 - ct[j] * ct[j]));
            points.push_back({r[i] * st * std::cos(ph[k]), r[i] * st * std::sin(ph[k]),
                              r[i] * ct[j]});
            weights.push_back(wr[i] * wct[j] * wph[k] * r[i] * r[i]);
          }
    }
  }
};

}  // namespace anisoac
