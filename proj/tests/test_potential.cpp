#include <doctest.h>

#include <cmath>
#include <numbers>

#include "anisoac/potential.hpp"
#include "anisoac/quadrature.hpp"

using namespace anisoac;

TEST_CASE("built-in well values and derivatives") {
  const auto q = PotentialSpec::quartic();
  double W, dW, d2W;
  q.eval(1.0, W, dW, d2W);
  CHECK(W == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dW == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d2W == doctest::Approx(2.0));
  q.eval(0.0, W, dW, d2W);
  CHECK(W == doctest::Approx(0.25));
  CHECK(dW == doctest::Approx(0.0));
  CHECK(d2W == doctest::Approx(-1.0));

  const auto c = PotentialSpec::cosine();
  c.eval(0.0, W, dW, d2W);
  CHECK(W == doctest::Approx(2.0));
  CHECK(dW == doctest::Approx(0.0));
  CHECK(d2W == doctest::Approx(-std::numbers::pi * std::numbers::pi));
}

TEST_CASE("quadratic continuation is C2 at the gluing point") {
  for (const auto& spec : {PotentialSpec::quartic(), PotentialSpec::cosine()}) {
    for (double s0 : {1.5, -1.5}) {
      double Wl, dWl, d2Wl, Wr, dWr, d2Wr;
      spec.eval(s0 - 1e-9, Wl, dWl, d2Wl);
      spec.eval(s0 + 1e-9, Wr, dWr, d2Wr);
      CHECK(std::abs(Wl - Wr) < 1e-8);
      CHECK(std::abs(dWl - dWr) < 1e-7);
      CHECK(std::abs(d2Wl - d2Wr) < 1e-5);
    }
  }
}

TEST_CASE("transition cost matches the closed forms") {
  // quartic: integral of (1-s^2)/sqrt(2) over [-1,1] = 2 sqrt(2)/3
  CHECK(std::abs(PotentialSpec::quartic().cw() - 2.0 * std::sqrt(2.0) / 3.0) < 1e-10);
  // cosine: integral of 2 cos(pi s / 2) = 8/pi
  CHECK(std::abs(PotentialSpec::cosine().cw() - 8.0 / std::numbers::pi) < 1e-10);
}

TEST_CASE("transition cost is stable under an independent fixed-order rule") {
  // composite Simpson as the cross-check oracle
  for (const auto& spec : {PotentialSpec::quartic(), PotentialSpec::cosine()}) {
    const int n = 20000;
    const double h = 2.0 / n;
    double acc = 0;
    auto f = [&](double s) { return std::sqrt(std::max(0.0, 2.0 * spec.W(s))); };
    for (int i = 0; i < n; i += 2)
      acc += h / 3.0 * (f(-1 + i * h) + 4 * f(-1 + (i + 1) * h) + f(-1 + (i + 2) * h));
    CHECK(std::abs(acc - spec.cw()) < 1e-7);
  }
}

TEST_CASE("quartic connecting orbit matches tanh(t/sqrt(2))") {
  const auto spec = PotentialSpec::quartic();
  const Profile1D prof = heteroclinic(spec, 8.0, 1601);
  double sup = 0;
  for (std::size_t i = 0; i < prof.U.size(); ++i)
    sup = std::max(sup, std::abs(prof.U[i] - std::tanh(prof.t[i] / std::sqrt(2.0))));
  CHECK(sup <= 1e-6);
  CHECK(prof.U[800] == doctest::Approx(0.0).epsilon(1e-12));  // U(0) = 0
}

TEST_CASE("connecting orbit against an independent fixed-step integrator") {
  const auto spec = PotentialSpec::cosine();
  const Profile1D prof = heteroclinic(spec, 6.0, 601);
  // RK4 at two fixed steps; Richardson gap bounds the oracle error
  auto rk4_to = [&](double t_end, double dt) {
    auto f = [&](double u) { return std::sqrt(std::max(0.0, 2.0 * spec.W(u))); };
    double u = 0;
    const int n = int(std::round(t_end / dt));
    for (int i = 0; i < n; ++i) {
      const double k1 = f(u), k2 = f(u + 0.5 * dt * k1), k3 = f(u + 0.5 * dt * k2),
                   k4 = f(u + dt * k3);
      u += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return u;
  };
  for (double t : {1.0, 2.5, 4.0}) {
    const double coarse = rk4_to(t, 1e-3), fine = rk4_to(t, 5e-4);
    CHECK(std::abs(coarse - fine) < 1e-10);
    const std::size_t idx = std::size_t(std::round((t + 6.0) / (12.0 / 600)));
    CHECK(std::abs(prof.U[idx] - fine) < 1e-8);
  }
}

TEST_CASE("orbit approaches the well at the linearized exponential rate") {
  const auto spec = PotentialSpec::quartic();
  const Profile1D prof = heteroclinic(spec, 12.0, 1201);
  // fit log(1-U) on the right half; slope should be -sqrt(W''(1))
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < prof.U.size(); ++i) {
    if (prof.t[i] > 4.0 && prof.U[i] < 1.0 - 1e-12) {
      ts.push_back(prof.t[i]);
      ys.push_back(std::log(1.0 - prof.U[i]));
    }
  }
  const double slope = fit_slope(ts, ys);
  CHECK(slope == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-3));
  CHECK(prof.U.back() > 1.0 - std::exp(-0.5 * 12.0));
  CHECK(prof.U.back() < 1.0);
}

TEST_CASE("equipartition holds along the orbit") {
  const Profile1D prof = heteroclinic(PotentialSpec::cosine(), 8.0, 801);
  const auto spec = PotentialSpec::cosine();
  for (std::size_t i = 0; i < prof.U.size(); ++i) {
    CHECK(std::abs(0.5 * prof.dU[i] * prof.dU[i] - spec.W(prof.U[i])) < 1e-12);
  }
}

TEST_CASE("truncated profile branches") {
  const auto spec = PotentialSpec::quartic();
  const Heteroclinic& het = shared_heteroclinic(spec);
  const double g = 3.0;
  CHECK(truncated_profile(spec, g, 2.0) == doctest::Approx(het.eval(2.0)).epsilon(1e-12));
  CHECK(truncated_profile(spec, g, 6.0) == 1.0);
  CHECK(truncated_profile(spec, g, -6.0) == -1.0);
  // continuity at the branch points
  CHECK(std::abs(truncated_profile(spec, g, 3.0 - 1e-10) -
                 truncated_profile(spec, g, 3.0 + 1e-10)) < 1e-8);
  CHECK(std::abs(truncated_profile(spec, g, 2 * g - 1e-9) - 1.0) < 1e-6);
  // odd for an even well
  for (double t : {0.3, 1.7, 3.5, 4.9}) {
    CHECK(truncated_profile(spec, g, t) ==
          doctest::Approx(-truncated_profile(spec, g, -t)).epsilon(1e-10));
  }
}

TEST_CASE("audit passes the built-in wells") {
  const PotentialAudit qa = audit_potential(PotentialSpec::quartic());
  CHECK(qa.ok);
  // (sqrt W)'' = -1 identically for the quartic well on (-1,1)
  CHECK(qa.c_sqrtW == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(qa.c_quad > 0);
  CHECK(qa.cw == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0));

  const PotentialAudit ca = audit_potential(PotentialSpec::cosine());
  CHECK(ca.ok);
  CHECK(ca.c_sqrtW > 0);
}

TEST_CASE("audit of (sqrt W)'' against a finite-difference oracle") {
  const auto spec = PotentialSpec::quartic();
  auto sqrtW = [&](double s) { return std::sqrt(spec.W(s)); };
  const double h = 1e-5;
  for (double s : {-0.7, -0.2, 0.4, 0.9}) {
    const double fd = (sqrtW(s + h) - 2 * sqrtW(s) + sqrtW(s - h)) / (h * h);
    CHECK(fd == doctest::Approx(-1.0).epsilon(1e-4));
  }
}

TEST_CASE("a single well fails the audit at the vanishing clause") {
  const PotentialAudit a = audit_potential(PotentialSpec::custom({0, 0, 1}));  // s^2
  CHECK(!a.ok);
  bool mentions_well = false;
  for (const auto& f : a.failures)
    if (f.find("W(") != std::string::npos) mentions_well = true;
  CHECK(mentions_well);
}
