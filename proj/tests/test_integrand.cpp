#include <doctest.h>

#include <cmath>
#include <random>

#include "anisoac/integrand.hpp"

using namespace anisoac;

namespace {
Mat diag(double a, double b) {
  Mat m = zero_mat();
  m[0][0] = a;
  m[1][1] = b;
  return m;
}
}  // namespace

TEST_CASE("pointwise values of the built-in families") {
  const auto quad = IntegrandSpec::quadratic(2, diag(4, 1));
  CHECK(quad.F({0, 0, 0}, {1, 0, 0}) == doctest::Approx(2.0));
  const auto mix = IntegrandSpec::quartic_mixture(2, 1.0);
  CHECK(mix.F({0, 0, 0}, {1, 0, 0}) == doctest::Approx(std::pow(2.0, 0.25)));
  const auto iso = IntegrandSpec::isotropic(2);
  CHECK(iso.F({0, 0, 0}, {3, 4, 0}) == doctest::Approx(5.0));
}

TEST_CASE("Euler identity <DF^2(v), v> = 2 F^2(v)") {
  const Vec v{0.3, -0.7, 0};
  for (const auto& spec : {IntegrandSpec::isotropic(2),
                           IntegrandSpec::quadratic(2, diag(4, 1)),
                           IntegrandSpec::quartic_mixture(2, 1.0)}) {
    const FEval fe = f_eval(spec, {0, 0, 0}, v);
    CHECK(dot(fe.dFsq, v) == doctest::Approx(2.0 * fe.F * fe.F).epsilon(1e-12));
  }
}

TEST_CASE("derivatives of F^2 match finite differences") {
  std::mt19937_64 rng(11);
  for (const auto& spec : {IntegrandSpec::quadratic(2, diag(4, 1)),
                           IntegrandSpec::quartic_mixture(2, 0.5),
                           IntegrandSpec::quartic_mixture(3, 2.0)}) {
    for (int rep = 0; rep < 20; ++rep) {
      Vec v = random_unit(rng, spec.dim());
      const double r = uniform(rng, 0.3, 2.0);
      v = scaled(v, r);
      const FEval fe = f_eval(spec, {0, 0, 0}, v, true);
      const double h = 1e-6;
      for (int a = 0; a < spec.dim(); ++a) {
        Vec vp = v, vm = v;
        vp[a] += h;
        vm[a] -= h;
        const double fd =
            (spec.fsq_base(vp) - spec.fsq_base(vm)) / (2 * h);
        CHECK(fe.dFsq[a] == doctest::Approx(fd).epsilon(1e-6));
        const Vec dp = spec.dfsq_base(vp), dm = spec.dfsq_base(vm);
        for (int b = 0; b < spec.dim(); ++b)
          CHECK(fe.d2Fsq[b][a] == doctest::Approx((dp[b] - dm[b]) / (2 * h)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("one-homogeneity and evenness residuals stay at rounding level") {
  std::mt19937_64 rng(5);
  for (const auto& spec : {IntegrandSpec::isotropic(3),
                           IntegrandSpec::quadratic(2, diag(4, 1)),
                           IntegrandSpec::quartic_mixture(2, 1.0)}) {
    for (int rep = 0; rep < 200; ++rep) {
      const Vec v = random_unit(rng, spec.dim());
      const double tau = uniform(rng, 0.0, 10.0);
      const double lhs = spec.f_base(scaled(v, tau));
      const double rhs = tau * spec.f_base(v);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + tau));
      CHECK(spec.f_base(scaled(v, -1.0)) == doctest::Approx(spec.f_base(v)).epsilon(1e-14));
    }
  }
}

TEST_CASE("Hessian at the origin exists only for quadratic forms") {
  const auto quad = IntegrandSpec::quadratic(2, diag(4, 1));
  CHECK_NOTHROW(f_eval(quad, {0, 0, 0}, {0, 0, 0}, true));
  const auto mix = IntegrandSpec::quartic_mixture(2, 1.0);
  CHECK_THROWS(f_eval(mix, {0, 0, 0}, {0, 0, 0}, true));
}

TEST_CASE("mollification of a quadratic form is the form itself") {
  const auto spec = IntegrandSpec::quadratic(2, diag(4, 1));
  const MollifiedIntegrand m = mollify(spec, 0.2, 12);
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const Vec v = scaled(random_unit(rng, 2), uniform(rng, 0.0, 3.0));
    const GEval ge = m.g_eval({0, 0, 0}, v);
    const double exact = 4 * v[0] * v[0] + v[1] * v[1];
    CHECK(std::abs(ge.G - exact) <= 1e-9 * (1 + exact));
    CHECK(ge.d2G[0][0] == doctest::Approx(8.0));
    CHECK(ge.d2G[1][1] == doctest::Approx(2.0));
  }
  const auto iso = IntegrandSpec::isotropic(2);
  const MollifiedIntegrand mi = mollify(iso, 0.3, 8);
  const GEval ge = mi.g_eval({0, 0, 0}, {0.4, -1.2, 0});
  CHECK(ge.G == doctest::Approx(0.16 + 1.44).epsilon(1e-12));
}

TEST_CASE("mollification at the origin: zero value, zero slope, convex") {
  const auto mix = IntegrandSpec::quartic_mixture(2, 1.0);
  const MollifiedIntegrand m(mix, 0.1, 12);
  const GEval ge = m.g_eval({0, 0, 0}, {0, 0, 0});
  CHECK(ge.G == 0.0);
  CHECK(std::abs(ge.dG[0]) < 1e-12);
  CHECK(std::abs(ge.dG[1]) < 1e-12);
  CHECK(ge.d2G[0][0] > 0);
  CHECK(ge.d2G[0][0] * ge.d2G[1][1] - ge.d2G[0][1] * ge.d2G[1][0] > 0);
}

TEST_CASE("smoothing error is O(delta^2) away from the origin") {
  const auto mix = IntegrandSpec::quartic_mixture(2, 1.0);
  const MollifiedIntegrand m2(mix, 0.2, 12), m1(mix, 0.1, 12);
  const Vec v{1, 1, 0};
  const double exact = mix.fsq_base(v);
  const double e2 = std::abs(m2.g_eval({0, 0, 0}, v).G - exact);
  const double e1 = std::abs(m1.g_eval({0, 0, 0}, v).G - exact);
  const double ratio = e2 / e1;
  CHECK(ratio > 3.2);
  CHECK(ratio < 4.8);

  // against a finer quadrature of the convolution; the bump weight limits
  // fixed-order moment accuracy to ~1e-3 relative, i.e. ~delta^2 * 1e-3 here
  const MollifiedIntegrand m1f(mix, 0.1, 24);
  CHECK(std::abs(m1.g_eval({0, 0, 0}, {2, 0, 0}).G -
                 m1f.g_eval({0, 0, 0}, {2, 0, 0}).G) < 1e-5);
  CHECK(std::abs(m1.g_eval({0, 0, 0}, {2, 0, 0}).G - mix.fsq_base({2, 0, 0})) < 1e-3);
}

TEST_CASE("scaling identity links different smoothing scales") {
  const auto mix = IntegrandSpec::quartic_mixture(2, 1.0);
  const MollifiedIntegrand md(mix, 0.25, 10), m1(mix, 0.999, 10);
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 40; ++rep) {
    Vec v = scaled(random_unit(rng, 2), uniform(rng, 0.0, 2.0));
    const double lhs = md.g_base(v, false).G;
    // G_delta(v) = delta^2 G_1(v / delta); evaluate G_1 through the 0.999 object
    const Vec y = scaled(v, 1.0 / 0.25);
    const double d1 = 0.999;
    const double rhs = (0.25 * 0.25 / (d1 * d1)) * m1.g_base(scaled(y, d1), false).G;
    CHECK(std::abs(lhs - rhs) <= 2e-6 * (1 + std::abs(lhs)));
  }
}

TEST_CASE("differential of the smoothed square is strongly monotone") {
  const auto mix = IntegrandSpec::quartic_mixture(2, 1.0);
  const MollifiedIntegrand m(mix, 0.1, 12);
  const IntegrandAudit audit = audit_integrand(mix, 200, 42, &m);
  REQUIRE(audit.ok);
  const double bound = 2.0 * audit.lambda_prime_est - 1e-8;
  std::mt19937_64 rng(1234);
  double worst = 1e300;
  for (int rep = 0; rep < 1000; ++rep) {
    const Vec v = scaled(random_unit(rng, 2), uniform(rng, 0.0, 2.0));
    const Vec w = scaled(random_unit(rng, 2), uniform(rng, 0.0, 2.0));
    const Vec dv = minus(v, w);
    const double n2 = dot(dv, dv);
    if (n2 < 1e-12) continue;
    const Vec gv = m.g_base(v, false).dG, gw = m.g_base(w, false).dG;
    worst = std::min(worst, dot(minus(gv, gw), dv) / n2);
  }
  CHECK(worst >= bound);
}

TEST_CASE("audit estimates the ellipticity constants") {
  const IntegrandAudit iso = audit_integrand(IntegrandSpec::isotropic(2), 100, 0);
  CHECK(iso.ok);
  CHECK(iso.lambda_est == doctest::Approx(1.0).epsilon(1e-9));

  const IntegrandAudit q =
      audit_integrand(IntegrandSpec::quadratic(2, diag(4, 1)), 300, 0);
  CHECK(q.ok);
  // extremal Rayleigh quotient of the square root form: 1/2
  CHECK(q.lambda_est == doctest::Approx(0.5).epsilon(1e-6));

  const IntegrandAudit mix =
      audit_integrand(IntegrandSpec::quartic_mixture(2, 1.0), 300, 0);
  CHECK(mix.ok);
  CHECK(mix.lambda_prime_est > 0);
  CHECK(mix.worst_evenness < 1e-13);
  CHECK(mix.worst_homogeneity < 1e-12);
}

TEST_CASE("audit is deterministic given the seed") {
  const auto spec = IntegrandSpec::quartic_mixture(2, 1.0);
  const IntegrandAudit a = audit_integrand(spec, 100, 77);
  const IntegrandAudit b = audit_integrand(spec, 100, 77);
  CHECK(a.lambda_est == b.lambda_est);
  CHECK(a.lambda_prime_est == b.lambda_prime_est);
}

TEST_CASE("low quadrature orders are rejected") {
  const auto spec = IntegrandSpec::quartic_mixture(2, 1.0);
  CHECK_THROWS(MollifiedIntegrand(spec, 0.1, 3));
  CHECK_THROWS(MollifiedIntegrand(spec, 1.5, 8));
}

TEST_CASE("spatial multiplier scales the smoothed square by m^2") {
  auto spec = IntegrandSpec::quadratic(2, diag(4, 1));
  spec.with_modulation(0.3, {1, 1, 1});
  const MollifiedIntegrand m = mollify(spec, 0.1, 8);
  const Vec x{0.1, 0.2, 0};
  const Vec v{0.7, -0.4, 0};
  const double mm = spec.modulation(x);
  CHECK(m.g_eval(x, v).G ==
        doctest::Approx(mm * mm * (4 * v[0] * v[0] + v[1] * v[1])).epsilon(1e-12));
}
