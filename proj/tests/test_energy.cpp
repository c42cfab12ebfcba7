#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "anisoac/energy.hpp"

using namespace anisoac;

namespace {
Mat diag(double a, double b) {
  Mat m = zero_mat();
  m[0][0] = a;
  m[1][1] = b;
  return m;
}

ScalarField smooth_random(const Grid& g, std::mt19937_64& rng, double amp = 0.5) {
  // few low modes so gradients stay moderate
  ScalarField u(g);
  std::vector<double> c;
  for (int i = 0; i < 12; ++i) c.push_back(uniform(rng, -1, 1));
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const Vec x = g.position(g.coords(i));
    const double X = 2 * std::numbers::pi * x[0], Y = 2 * std::numbers::pi * x[1];
    u[i] = amp * (c[0] * std::sin(X) + c[1] * std::cos(Y) + c[2] * std::sin(X + Y) +
                  c[3] * std::cos(2 * X - Y) + c[4] * std::sin(2 * Y) +
                  c[5] * std::cos(X) * std::sin(Y));
  }
  return u;
}

// measured order of the centered FD error of the directional derivative
double fd_order(const ScalarField& u, const ScalarField& v, const EnergyParams& p) {
  const ScalarField g = grad_energy(u, p);
  const double exact = p.inner_w(g, v);
  double err[2];
  const double hs[2] = {1e-3, 1e-4};
  for (int k = 0; k < 2; ++k) {
    ScalarField up(*p.grid), um(*p.grid);
    for (std::int64_t i = 0; i < p.grid->size(); ++i) {
      up[i] = u[i] + hs[k] * v[i];
      um[i] = u[i] - hs[k] * v[i];
    }
    err[k] = std::abs((energy(up, p) - energy(um, p)) / (2 * hs[k]) - exact);
  }
  return std::log10(err[0] / std::max(err[1], 1e-300));
}
}  // namespace

TEST_CASE("energy of the pure phases and of the unstable constant") {
  const Grid g(2, 32);
  const auto W = PotentialSpec::quartic();
  const auto F = IntegrandSpec::isotropic(2);
  const EnergyParams p(g, W, F, 0.1);
  CHECK(energy(ScalarField(g, 1.0), p) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(energy(ScalarField(g, -1.0), p) == doctest::Approx(0.0).epsilon(1e-15));
  // W(0) = 1/4 over the unit torus
  CHECK(energy(ScalarField(g, 0.0), p) == doctest::Approx(0.25 / 0.1).epsilon(1e-13));
}

TEST_CASE("stripe pair approaches twice the transition cost times F") {
  const Grid g(2, 256);
  const auto W = PotentialSpec::quartic();
  const auto F = IntegrandSpec::quadratic(2, diag(4, 1));
  const double eps = 1.0 / 64;
  const EnergyParams p(g, W, F, eps);
  const Heteroclinic& het = shared_heteroclinic(W);
  ScalarField u(g);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const Vec x = g.position(g.coords(i));
    const double dist = std::abs(g.per_delta(0.5, x[1], 1));
    u[i] = truncated_profile(het, 8.0, (0.25 - dist) / (eps * F.f_base({0, 1, 0})));
  }
  // two transitions with normal e2, each costing cw * F(e2) = cw
  const double expected = 2.0 * W.cw() * F.f_base({0, 1, 0});
  CHECK(energy(u, p) == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("density integrates back to the energy") {
  const Grid g(2, 48);
  const auto W = PotentialSpec::cosine();
  auto F = IntegrandSpec::quartic_mixture(2, 1.0);
  const MollifiedIntegrand moll(F, 0.1, 8);
  std::mt19937_64 rng(3);
  // conformal weight on as well
  ScalarField phi(g);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const Vec x = g.position(g.coords(i));
    phi[i] = 0.15 * std::cos(2 * std::numbers::pi * x[0]);
  }
  const ConformalMetric metric(phi);
  const EnergyParams p(g, W, F, 0.2, 0.1, &moll, &metric);
  const ScalarField u = smooth_random(g, rng);
  const ScalarField dens = energy_density(u, p);
  CHECK(integrate(dens, &metric) == doctest::Approx(energy(u, p)).epsilon(1e-12));
  // constant field: density is W(c)/eps everywhere
  const ScalarField c(g, 0.3);
  const ScalarField dc = energy_density(c, p);
  for (std::int64_t i = 0; i < g.size(); ++i)
    CHECK(dc[i] == doctest::Approx(W.W(0.3) / 0.2).epsilon(1e-14));
}

TEST_CASE("gradient is the exact differential of the discrete energy") {
  const Grid g(2, 32);
  const auto W = PotentialSpec::quartic();
  std::mt19937_64 rng(17);

  SUBCASE("raw integrand, isotropic") {
    const auto F = IntegrandSpec::isotropic(2);
    const EnergyParams p(g, W, F, 0.125);
    for (int rep = 0; rep < 10; ++rep) {
      const ScalarField u = smooth_random(g, rng);
      const ScalarField v = smooth_random(g, rng);
      CHECK(fd_order(u, v, p) >= 1.9);
    }
  }
  SUBCASE("smoothed quartic mixture, modulation and metric on") {
    auto F = IntegrandSpec::quartic_mixture(2, 1.0);
    F.with_modulation(0.2, {1, 1, 1});
    const MollifiedIntegrand moll(F, 0.1, 8);
    ScalarField phi(g);
    for (std::int64_t i = 0; i < g.size(); ++i)
      phi[i] = 0.1 * std::sin(2 * std::numbers::pi * g.position(g.coords(i))[1]);
    const ConformalMetric metric(phi);
    const EnergyParams p(g, W, F, 0.125, 0.1, &moll, &metric);
    for (int rep = 0; rep < 10; ++rep) {
      const ScalarField u = smooth_random(g, rng);
      const ScalarField v = smooth_random(g, rng);
      CHECK(fd_order(u, v, p) >= 1.9);
    }
  }
}

TEST_CASE("gradient at a pure phase vanishes") {
  const Grid g(2, 16);
  const auto W = PotentialSpec::quartic();
  const auto F = IntegrandSpec::isotropic(2);
  const EnergyParams p(g, W, F, 0.1);
  const ScalarField gr = grad_energy(ScalarField(g, 1.0), p);
  CHECK(norm_sup(gr) == 0.0);
}

TEST_CASE("raw isotropic gradient matches the classical operator") {
  const Grid g(2, 64);
  const auto W = PotentialSpec::quartic();
  const auto F = IntegrandSpec::isotropic(2);
  const double eps = 0.25;
  const EnergyParams p(g, W, F, eps);
  std::mt19937_64 rng(23);
  const ScalarField u = smooth_random(g, rng);
  const ScalarField gr = grad_energy(u, p);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    double lap = 0;  // compact five-point stencil
    for (int a = 0; a < 2; ++a)
      lap += (u[g.shift(i, a, +1)] - 2 * u[i] + u[g.shift(i, a, -1)]) /
             (g.h[a] * g.h[a]);
    const double classical = -eps * lap + W.dW(u[i]) / eps;
    CHECK(gr[i] == doctest::Approx(classical).epsilon(1e-10));
  }
}

TEST_CASE("Hessian symmetry and FD consistency") {
  const Grid g(2, 32);
  const auto W = PotentialSpec::quartic();
  auto F = IntegrandSpec::quartic_mixture(2, 1.0);
  const MollifiedIntegrand moll(F, 0.1, 8);
  const EnergyParams p(g, W, F, 0.125, 0.1, &moll);
  std::mt19937_64 rng(31);
  // cap the amplitude: the quadratic continuation of W beyond |s|=1.5 is C^2
  // only, and a third-derivative jump inside the FD interval makes two-point
  // order estimates jitter
  auto capped = [&](double cap) {
    ScalarField u = smooth_random(g, rng, 1.0);
    const double mx = norm_sup(u);
    for (auto& x : u.v) x *= cap / mx;
    return u;
  };
  const ScalarField u = capped(1.2);
  const HessOperator H(u, p);
  double order_sum = 0;
  const int reps = 5;
  for (int rep = 0; rep < reps; ++rep) {
    const ScalarField v = capped(1.2);
    const ScalarField w = capped(1.2);
    const double a = p.inner_w(H.apply(v), w);
    const double b = p.inner_w(H.apply(w), v);
    CHECK(std::abs(a - b) <= 1e-10 * (std::abs(a) + std::abs(b) + 1));

    // H v against centered differences of the gradient, measured in the
    // asymptotic step range (larger steps sweep across the smoothing scales
    // of the integrand and wiggle around the h^2 line)
    const ScalarField Hv = H.apply(v);
    double err[2];
    const double hs[2] = {1e-4, 1e-5};
    for (int k = 0; k < 2; ++k) {
      ScalarField up(g), um(g);
      for (std::int64_t i = 0; i < g.size(); ++i) {
        up[i] = u[i] + hs[k] * v[i];
        um[i] = u[i] - hs[k] * v[i];
      }
      const ScalarField gp = grad_energy(up, p), gm = grad_energy(um, p);
      ScalarField diff(g);
      for (std::int64_t i = 0; i < g.size(); ++i)
        diff[i] = (gp[i] - gm[i]) / (2 * hs[k]) - Hv[i];
      err[k] = p.norm_w(diff);
    }
    const double order = std::log10(err[0] / std::max(err[1], 1e-300));
    CHECK(order >= 1.9);
    order_sum += order;
  }
  CHECK(order_sum / reps >= 1.9);
}

TEST_CASE("Hessian requires a positive smoothing scale") {
  const Grid g(2, 16);
  const auto W = PotentialSpec::quartic();
  const auto F = IntegrandSpec::isotropic(2);
  const EnergyParams p(g, W, F, 0.1);
  const ScalarField u(g, 0.5);
  CHECK_THROWS(hess_apply(u, u, p));
}

TEST_CASE("flat-phase Hessian spectrum against the Fourier symbol") {
  // For u == 1 and a quadratic integrand the operator diagonalizes in the
  // Fourier basis with symbol eps * sum_a 4 sin^2(pi k_a h_a)/h_a^2 + W''(1)/eps
  // (the compact-stencil symbol of the averaged one-sided differences).
  const Grid g(2, 32);
  const auto W = PotentialSpec::quartic();
  const auto F = IntegrandSpec::isotropic(2);
  const MollifiedIntegrand moll(F, 0.05, 8);
  const double eps = 0.125;
  const EnergyParams p(g, W, F, eps, 0.05, &moll);
  const ScalarField one(g, 1.0);
  const HessOperator H(one, p);
  for (int k1 : {0, 1, 5, 16}) {
    for (int k2 : {0, 3}) {
      ScalarField v(g);
      for (std::int64_t i = 0; i < g.size(); ++i) {
        const Vec x = g.position(g.coords(i));
        v[i] = std::cos(2 * std::numbers::pi * (k1 * x[0] + k2 * x[1]));
      }
      const double rayleigh = p.inner_w(H.apply(v), v) / p.inner_w(v, v);
      auto s2 = [&](int k, int a) {
        const double s = std::sin(std::numbers::pi * k * g.h[a]);
        return 4.0 * s * s / (g.h[a] * g.h[a]);
      };
      const double symbol = eps * (s2(k1, 0) + s2(k2, 1)) + W.d2W(1.0) / eps;
      CHECK(rayleigh == doctest::Approx(symbol).epsilon(1e-12));
    }
  }
}

TEST_CASE("energy is sandwiched by the isotropic energy") {
  const Grid g(2, 32);
  const auto W = PotentialSpec::quartic();
  auto F = IntegrandSpec::quadratic(2, diag(4, 1));
  const MollifiedIntegrand moll(F, 0.1, 8);
  const EnergyParams p(g, W, F, 0.125, 0.1, &moll);
  const auto Fiso = IntegrandSpec::isotropic(2);
  const EnergyParams piso(g, W, Fiso, 0.125);
  const IntegrandAudit audit = audit_integrand(F, 200, 0, &moll);
  const double lp = audit.lambda_prime_est;
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 10; ++rep) {
    const ScalarField u = smooth_random(g, rng, 1.0);
    const double E = energy(u, p);
    const double Etilde = energy(u, piso);
    CHECK(E >= lp * lp * Etilde * (1 - 1e-12));
    CHECK(E <= Etilde / (lp * lp) * (1 + 1e-12));
  }
}
