#pragma once

#include <memory>
#include <string>
#include <vector>

#include "anisoac/quadrature.hpp"
#include "anisoac/util.hpp"

namespace anisoac {

// Positive, even, 1-homogeneous surface integrand F(x,v). Families:
//   isotropic        F = |v|
//   quadratic        F = sqrt(v.A v) with A symmetric positive definite
//   quartic_mixture  F = (|v|^4 + beta * sum_i v_i^4)^{1/4}, beta >= 0
// Spatial dependence enters through a smooth positive periodic multiplier
// m(x) = 1 + amp * prod_a cos(2 pi x_a / L_a), so F(x,v) = m(x) * F_base(v).
class IntegrandSpec {
 public:
  enum class Family { isotropic, quadratic, quartic_mixture };

  static IntegrandSpec isotropic(int dim);
  static IntegrandSpec quadratic(int dim, const Mat& A);
  static IntegrandSpec quartic_mixture(int dim, double beta);

  IntegrandSpec& with_modulation(double amp, std::array<double, 3> lengths = {1, 1, 1});

  Family family() const { return family_; }
  int dim() const { return dim_; }
  double beta() const { return beta_; }
  const Mat& matrix() const { return A_; }
  double modulation_amp() const { return mod_amp_; }
  std::string family_name() const;

  // True when F^2 is a quadratic form (mollification is then exact and the
  // Hessian exists at the origin).
  bool quadratic_form() const {
    return family_ == Family::isotropic || family_ == Family::quadratic;
  }

  double modulation(const Vec& x) const;

  // Autonomous part (multiplier excluded).
  double f_base(const Vec& v) const;
  double fsq_base(const Vec& v) const;
  Vec dfsq_base(const Vec& v) const;
  Mat d2fsq_base(const Vec& v) const;  // invalid at v=0 unless quadratic_form()

  double F(const Vec& x, const Vec& v) const { return modulation(x) * f_base(v); }

 private:
  Family family_ = Family::isotropic;
  int dim_ = 2;
  Mat A_ = zero_mat();
  double beta_ = 0;
  double mod_amp_ = 0;
  std::array<double, 3> lengths_{1, 1, 1};
};

struct FEval {
  double F = 0;
  Vec dFsq{};   // differential of F^2 in v
  bool has_hess = false;
  Mat d2Fsq{};  // Hessian of F^2 in v, when defined
};

// Evaluate F, D(F^2) and optionally D^2(F^2) at (x, v). Requesting the
// Hessian at v=0 for a non-quadratic family is an error.
FEval f_eval(const IntegrandSpec& spec, const Vec& x, const Vec& v,
             bool want_hess = false);

struct GEval {
  double G = 0;
  Vec dG{};
  Mat d2G{};
};

// Smooth mollification G_delta(x,v) = (F_x^2 * eta_delta)(v) - (F_x^2 * eta_delta)(0)
// with eta the normalized radial bump exp(-1/(1-|y|^2)) on the unit ball.
// Quadratic families evaluate in closed form (the convolution shifts a
// quadratic by a constant which the subtraction removes). Other families use
// a fixed product quadrature over the ball; near the origin (|v| <= 2 delta)
// values come from a precomputed tabulation of G_1 through the scaling
// identity G_delta(v) = delta^2 G_1(v/delta), with a C^1 blend into the
// quadrature branch. Gradients and Hessians are the exact derivatives of the
// evaluated expression.
class MollifiedIntegrand {
 public:
  MollifiedIntegrand(const IntegrandSpec& spec, double delta, int quad_order,
                     bool build_table = true);

  const IntegrandSpec& spec() const { return *spec_; }
  double delta() const { return delta_; }
  int quad_order() const { return quad_order_; }

  // Autonomous part; the caller multiplies by m(x)^2 for G and its
  // derivatives in v.
  GEval g_base(const Vec& v, bool want_hess = true) const;

  // Full evaluation including the spatial multiplier.
  GEval g_eval(const Vec& x, const Vec& v, bool want_hess = true) const;

 private:
  GEval g_quadrature(const Vec& v, bool want_hess) const;
  GEval g_table(const Vec& y, bool want_hess) const;  // in scaled coords y = v/delta

  const IntegrandSpec* spec_;
  double delta_;
  int quad_order_;
  std::vector<Vec> offsets_;     // delta * y_q
  std::vector<Vec> nodes_;       // y_q
  std::vector<double> weights_;  // normalized: sum = 1
  // C^2 cubic B-spline coefficients of G_1 on [-extent, extent]^dim (one
  // ghost layer per side from the natural end condition)
  bool has_table_ = false;
  double table_h_ = 0, table_extent_ = 0, table_zero_ = 0;
  std::array<int, 3> table_n_{1, 1, 1};  // interpolation nodes per axis
  std::vector<double> coef_;
  double coef_at(int i, int j, int k) const;
};

MollifiedIntegrand mollify(const IntegrandSpec& spec, double delta, int quad_order = 12);

struct IntegrandAudit {
  bool ok = true;
  std::vector<std::string> failures;
  double lambda_est = 0;        // ellipticity of F (bound + orthoradial convexity)
  double lambda_prime_est = 0;  // same for the mollified F_delta
  double worst_evenness = 0;
  double worst_homogeneity = 0;  // normalized by (1+tau)|v|
  double min_d2g_eig = 0;        // smallest sampled Hessian eigenvalue of G_delta
};

// Randomized sampling audit (deterministic given seed): measures the
// ellipticity constants instead of assuming them. Axis directions are always
// included so extremal quadratic forms are hit exactly. If `moll` is null a
// temporary table-free mollification at delta=0.1 is used for the
// lambda'-estimate of non-quadratic families.
IntegrandAudit audit_integrand(const IntegrandSpec& spec, int samples,
                               std::uint64_t seed,
                               const MollifiedIntegrand* moll = nullptr);

}  // namespace anisoac
