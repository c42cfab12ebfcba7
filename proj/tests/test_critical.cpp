#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "anisoac/critical.hpp"

using namespace anisoac;

namespace {
struct Setup {
  Grid g;
  PotentialSpec W = PotentialSpec::quartic();
  IntegrandSpec F;
  std::unique_ptr<MollifiedIntegrand> moll;
  double eps;

  Setup(int n, double eps_, double delta)
      : g(2, n), F(IntegrandSpec::isotropic(2)), eps(eps_) {
    if (delta > 0) moll = std::make_unique<MollifiedIntegrand>(F, delta, 8);
  }
  EnergyParams params(double delta) const {
    return EnergyParams(g, W, F, eps, delta, moll.get());
  }
};

ScalarField stripe_pair(const EnergyParams& p, double width) {
  const Heteroclinic& het = shared_heteroclinic(*p.potential);
  ScalarField u(*p.grid);
  for (std::int64_t i = 0; i < p.grid->size(); ++i) {
    const Vec x = p.grid->position(p.grid->coords(i));
    const double dist = std::abs(p.grid->per_delta(0.5, x[1], 1));
    u[i] = truncated_profile(het, 6.0, (0.5 * width - dist) / p.epsilon);
  }
  return u;
}
}  // namespace

TEST_CASE("residual vanishes at the constant critical points") {
  Setup s(16, 0.1, 0.0);
  const EnergyParams p = s.params(0.0);
  CHECK(norm_sup(el_residual(ScalarField(s.g, 1.0), p)) == 0.0);
  CHECK(norm_sup(el_residual(ScalarField(s.g, -1.0), p)) == 0.0);
  // u == 0 is the unstable constant; W'(0) = 0 for the even well
  CHECK(norm_sup(el_residual(ScalarField(s.g, 0.0), p)) == 0.0);
}

TEST_CASE("descent from a small perturbation lands in the pure phase") {
  Setup s(32, 0.125, 0.0);
  const EnergyParams p = s.params(0.0);
  std::mt19937_64 rng(5);
  ScalarField u0(s.g);
  for (std::int64_t i = 0; i < s.g.size(); ++i) u0[i] = 1.0 + 0.05 * uniform(rng, -1, 1);
  const FlowResult fr = gradient_flow(u0, p, 0.0, 20000, 1e-10);
  CHECK(fr.converged);
  CHECK(fr.final_energy < 1e-12);
  for (std::int64_t i = 0; i < s.g.size(); ++i)
    CHECK(fr.u[i] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("energy decreases monotonically along the flow") {
  Setup s(32, 0.125, 0.0);
  const EnergyParams p = s.params(0.0);
  ScalarField u0 = stripe_pair(p, 0.3);
  // kick it so the flow has work to do
  for (std::int64_t i = 0; i < s.g.size(); ++i)
    u0[i] = std::clamp(u0[i] + 0.2 * std::sin(7.0 * double(i)), -1.2, 1.2);
  const FlowResult fr = gradient_flow(u0, p, 0.0, 400, 1e-12, 1);
  for (std::size_t k = 1; k < fr.trace.size(); ++k)
    CHECK(fr.trace[k].energy <= fr.trace[k - 1].energy + 1e-13);
}

TEST_CASE("flow from a smoothed stripe relaxes to the stripe pair level") {
  // the stripe pair is a saddle (breathing mode), so plain descent stalls at
  // the interaction scale; Newton finishes the job in the next test
  Setup s(64, 1.0 / 16, 0.05);
  const EnergyParams p = s.params(0.0);
  const ScalarField u0 = stripe_pair(p, 0.5);
  const FlowResult fr = gradient_flow(u0, p, 0.0, 20000, 1e-6);
  CHECK(fr.converged);
  // two transitions, isotropic cost cw each
  CHECK(fr.final_energy == doctest::Approx(2.0 * s.W.cw()).epsilon(0.02));
}

TEST_CASE("Newton refines a relaxed stripe to machine residual") {
  Setup s(64, 1.0 / 16, 0.05);
  const EnergyParams p0 = s.params(0.0);
  const EnergyParams p = s.params(0.05);
  const FlowResult fr = gradient_flow(stripe_pair(p0, 0.5), p0, 0.0, 4000, 1e-6);
  NewtonOptions opts;
  opts.tol = 1e-12;
  opts.spectrum_k = 4;
  auto [u, rep] = newton_refine(fr.u, p, opts);
  CHECK(rep.converged);
  CHECK(rep.residual_sup < 1e-12);
  CHECK(rep.newton_iters <= 6);
  CHECK(rep.max_overshoot <= 1e-6);
  // stripe pair is a saddle of the full problem: one breathing direction
  REQUIRE(rep.eigenvalues.size() >= 2);
  CHECK(rep.eigenvalues[0] < 0);
  CHECK(rep.eigenvalues[1] >= -1e-6 / p.epsilon);
  CHECK(rep.morse_index <= 1);

  // a second Newton run from the refined point stops immediately
  auto [u2, rep2] = newton_refine(u, p, opts);
  CHECK(rep2.newton_iters <= 2);
  CHECK(rep2.residual_sup < 1e-12);
}

TEST_CASE("Newton residual is robust to the damping schedule") {
  Setup s(48, 1.0 / 12, 0.05);
  const EnergyParams p0 = s.params(0.0);
  const EnergyParams p = s.params(0.05);
  const FlowResult fr = gradient_flow(stripe_pair(p0, 0.5), p0, 0.0, 3000, 1e-5);
  NewtonOptions a, b;
  a.spectrum_k = b.spectrum_k = 0;
  a.step_cap = 1e3;
  b.step_cap = 0.5;  // forces damped early steps
  const double ra = newton_refine(fr.u, p, a).second.residual_sup;
  const double rb = newton_refine(fr.u, p, b).second.residual_sup;
  CHECK(ra < 1e-11);
  CHECK(rb < 1e-11);
  CHECK(std::max(ra, rb) <= 2.0 * std::max(std::min(ra, rb), 5e-13));
}

TEST_CASE("spectrum of the constant phases against the Fourier oracle") {
  Setup s(32, 0.125, 0.05);
  const EnergyParams p = s.params(0.05);
  SUBCASE("stable phase: smallest eigenvalue is W''(1)/eps") {
    const SpectrumResult sp = spectrum(ScalarField(s.g, 1.0), p, 3, 600);
    REQUIRE(sp.values.size() >= 1);
    CHECK(sp.values[0] ==
          doctest::Approx(s.W.d2W(1.0) / p.epsilon).epsilon(1e-6));
    CHECK(sp.converged);
  }
  SUBCASE("unstable constant: smallest eigenvalue is W''(0)/eps") {
    const SpectrumResult sp = spectrum(ScalarField(s.g, 0.0), p, 3, 600);
    CHECK(sp.values[0] == doctest::Approx(s.W.d2W(0.0) / p.epsilon).epsilon(1e-6));
    CHECK(sp.values[0] < 0);
    CHECK(morse_index_estimate(sp, p.epsilon) >= 1);
  }
}

TEST_CASE("reported eigenpairs satisfy the residual certificate") {
  Setup s(32, 0.125, 0.05);
  const EnergyParams p = s.params(0.05);
  std::mt19937_64 rng(9);
  ScalarField u(s.g);
  for (std::int64_t i = 0; i < s.g.size(); ++i) u[i] = 0.9 * uniform(rng, -1, 1);
  const SpectrumResult sp = spectrum(u, p, 5, 700);
  REQUIRE(sp.values.size() == 5);
  for (std::size_t i = 0; i < sp.values.size(); ++i)
    CHECK(sp.residuals[i] <= 1e-6 * std::max(sp.hnorm_est, 1.0));
  for (std::size_t i = 1; i < sp.values.size(); ++i)
    CHECK(sp.values[i] >= sp.values[i - 1]);
}

TEST_CASE("spectrum preconditions") {
  Setup s(16, 0.1, 0.05);
  const EnergyParams praw = s.params(0.0);
  CHECK_THROWS(spectrum(ScalarField(s.g, 1.0), praw, 3));
  const EnergyParams p = s.params(0.05);
  CHECK_THROWS(spectrum(ScalarField(s.g, 1.0), p, 11));
}

TEST_CASE("minres solves a definite system in the weighted product") {
  Setup s(16, 0.25, 0.05);
  const EnergyParams p = s.params(0.05);
  const ScalarField one(s.g, 1.0);
  const HessOperator H(one, p);
  std::mt19937_64 rng(77);
  ScalarField b(s.g);
  for (std::int64_t i = 0; i < s.g.size(); ++i) b[i] = uniform(rng, -1, 1);
  ScalarField x(s.g);
  const double rel = minres([&H](const ScalarField& in, ScalarField& out) {
    H.apply(in, out);
  }, b, x, p, 1e-12, 2000);
  CHECK(rel <= 1e-10);
  ScalarField Hx(s.g);
  H.apply(x, Hx);
  for (std::int64_t i = 0; i < s.g.size(); ++i) Hx[i] -= b[i];
  CHECK(p.norm_w(Hx) <= 1e-9 * p.norm_w(b));
}
