#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace anisoac {

// Points and tangent vectors, padded to 3 components; unused entries are zero.
using Vec = std::array<double, 3>;

inline double dot(const Vec& a, const Vec& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec scaled(const Vec& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

inline Vec minus(const Vec& a, const Vec& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

// Small symmetric matrix, padded to 3x3.
using Mat = std::array<std::array<double, 3>, 3>;

inline Mat zero_mat() { return {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}; }

inline Vec matvec(const Mat& m, const Vec& v) {
  Vec r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i] += m[i][j] * v[j];
  return r;
}

// Pairwise (tree) summation: deterministic order, better rounding than naive.
inline double pairwise_sum(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n <= 16) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x.subspan(0, half)) + pairwise_sum(x.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum(std::span<const double>(x.data(), x.size()));
}

// FNV-1a 64-bit; stable across platforms, used for config fingerprints.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_finite(double x, const std::string& what) {
  if (!std::isfinite(x)) throw std::invalid_argument(what + ": non-finite value");
}

// Uniform double in [a,b) from a seeded engine. Thin wrapper so call sites
// stay uniform about which engine/distribution is in play.
inline double uniform(std::mt19937_64& rng, double a, double b) {
  return a + (b - a) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Random unit vector in the first `dim` components.
inline Vec random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    Vec v{};
    for (int a = 0; a < dim; ++a) v[a] = gauss(rng);
    const double r = norm(v);
    if (r > 1e-8) return scaled(v, 1.0 / r);
  }
}

// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  require(n >= 2 && y.size() == n, "fit_slope: need at least two samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

}  // namespace anisoac
