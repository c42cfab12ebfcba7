#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "anisoac/grid.hpp"
#include "anisoac/io.hpp"

using namespace anisoac;

namespace {
ScalarField random_field(const Grid& g, std::mt19937_64& rng) {
  ScalarField u(g);
  for (std::int64_t i = 0; i < g.size(); ++i) u[i] = uniform(rng, -1, 1);
  return u;
}

VectorField random_vfield(const Grid& g, std::mt19937_64& rng) {
  VectorField X(g);
  for (auto& v : X.v) v = uniform(rng, -1, 1);
  return X;
}
}  // namespace

TEST_CASE("grad of a sine is second order accurate") {
  for (int n : {64, 128}) {
    const Grid g(2, n);
    ScalarField u(g);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      const Vec x = g.position(g.coords(i));
      u[i] = std::sin(2 * std::numbers::pi * x[0]);
    }
    const VectorField du = grad(u);
    double err = 0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
      const Vec x = g.position(g.coords(i));
      err = std::max(err, std::abs(du.at(0, i) - 2 * std::numbers::pi *
                                                     std::cos(2 * std::numbers::pi * x[0])));
      err = std::max(err, std::abs(du.at(1, i)));
    }
    CHECK(err < 45.0 / (n * n));  // ~ (2 pi)^3 h^2 / 6
  }
}

TEST_CASE("grad of a constant vanishes") {
  const Grid g(2, 16);
  const ScalarField u(g, 0.7);
  const VectorField du = grad(u);
  for (double v : du.v) CHECK(v == 0.0);
}

TEST_CASE("fields reject non-finite data") {
  const Grid g(1, 8);
  std::vector<double> data(8, 0.0);
  data[3] = std::nan("");
  CHECK_THROWS(ScalarField(g, data));
}

TEST_CASE("div is the exact negative adjoint of grad") {
  std::mt19937_64 rng(7);
  for (int dim : {1, 2, 3}) {
    const Grid g(dim, dim == 3 ? 16 : 64);
    // also exercise a conformal weight
    ScalarField phi(g);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      const Vec x = g.position(g.coords(i));
      phi[i] = 0.2 * std::cos(2 * std::numbers::pi * x[0]);
    }
    const ConformalMetric metric(phi);
    for (int rep = 0; rep < 5; ++rep) {
      const ScalarField u = random_field(g, rng);
      const VectorField X = random_vfield(g, rng);
      for (const ConformalMetric* m : {(const ConformalMetric*)nullptr, &metric}) {
        const double lhs = inner(grad(u), X, m);
        const double rhs = inner(u, div(X, m), m);
        CHECK(std::abs(lhs + rhs) <= 1e-12 * (std::abs(lhs) + std::abs(rhs) + 1));
      }
    }
  }
}

TEST_CASE("div of grad matches the Laplacian of a sine") {
  const Grid g(2, 256);
  ScalarField u(g);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const Vec x = g.position(g.coords(i));
    u[i] = std::sin(2 * std::numbers::pi * x[0]);
  }
  const ScalarField lap = div(grad(u));
  double err = 0;
  const double k2 = 4 * std::numbers::pi * std::numbers::pi;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const Vec x = g.position(g.coords(i));
    err = std::max(err, std::abs(lap[i] + k2 * std::sin(2 * std::numbers::pi * x[0])));
  }
  CHECK(err < 2e-2);  // second order with the wide (2h) stencil
}

TEST_CASE("integrate of one is the volume, ball mass approximates a disk") {
  const Grid g(2, 128);
  const ScalarField one(g, 1.0);
  CHECK(integrate(one) == doctest::Approx(1.0).epsilon(1e-14));
  const double area = ball_mass(one, {0.37, 0.61, 0}, 0.2);
  CHECK(area == doctest::Approx(std::numbers::pi * 0.04).epsilon(0.05));
}

TEST_CASE("line_slice reproduces a 1D profile along an axis") {
  const Grid g(2, 64);
  ScalarField u(g);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const Vec x = g.position(g.coords(i));
    u[i] = std::sin(2 * std::numbers::pi * x[1]);
  }
  const auto s = line_slice(u, {0.25, 0.0, 0}, {0, 1, 0}, 1.0, 64);
  for (int j = 0; j < 64; ++j)
    CHECK(s[std::size_t(j)] ==
          doctest::Approx(std::sin(2 * std::numbers::pi * j / 64.0)).epsilon(1e-9));
}

TEST_CASE("snapshot roundtrip is bit exact and corrupt files are rejected") {
  const Grid g(2, 16);
  std::mt19937_64 rng(3);
  const ScalarField u = random_field(g, rng);
  SnapshotMeta meta;
  meta.dim = 2;
  meta.dims = g.cells;
  meta.lengths = g.lengths;
  meta.epsilon = 0.125;
  meta.delta = 0.05;
  meta.tags = {{"kind", "test"}};
  const std::string stem = "/tmp/anisoac_test_snapshot";
  write_snapshot(stem, u, meta);
  const Snapshot back = read_snapshot(stem);
  REQUIRE(back.field.v.size() == u.v.size());
  for (std::size_t i = 0; i < u.v.size(); ++i) CHECK(back.field.v[i] == u.v[i]);
  CHECK(back.meta.epsilon == 0.125);
  CHECK(back.meta.tags.at("kind") == "test");

  // truncate the payload: length mismatch must be detected
  {
    std::string raw = read_text(stem + ".f64");
    raw.resize(raw.size() - 8);
    atomic_write_text(stem + ".f64", raw);
  }
  CHECK_THROWS(read_snapshot(stem));
}

TEST_CASE("grids need at least 8 cells per axis") {
  CHECK_THROWS(Grid(2, 4));
  CHECK_THROWS(Grid(4, 16));
}
