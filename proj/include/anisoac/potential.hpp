#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "anisoac/util.hpp"

namespace anisoac {

// Double-well potential with wells at +-1. Built-in families are the quartic
// (1-s^2)^2/4 and the cosine 1+cos(pi*s); `custom` takes polynomial
// coefficients in s. Outside |s| <= 1.5 every family is continued by the
// quadratic Taylor polynomial at +-1.5 (matched value/slope/curvature), which
// keeps the growth conditions used by the solvers.
class PotentialSpec {
 public:
  enum class Family { quartic, cosine, custom };

  static PotentialSpec quartic();
  static PotentialSpec cosine();
  static PotentialSpec custom(std::vector<double> poly_coeffs);

  Family family() const { return family_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  // W, W', W'' at s (quadratic continuation beyond |s|=1.5).
  void eval(double s, double& W, double& dW, double& d2W) const;
  double W(double s) const;
  double dW(double s) const;
  double d2W(double s) const;

  // Transition cost: integral of sqrt(2W) over [-1,1], cached after the first
  // call; adaptive quadrature to 1e-10 absolute.
  double cw() const;

  std::string family_name() const;

 private:
  PotentialSpec() = default;
  double raw_W(double s) const;
  double raw_dW(double s) const;
  double raw_d2W(double s) const;

  Family family_ = Family::quartic;
  std::vector<double> coeffs_;
  mutable std::optional<double> cw_;
  static constexpr double glue_at_ = 1.5;
};

// Monotone transition profile: samples of the solution of U' = sqrt(2W(U)),
// U(0) = 0, on uniform abscissae.
struct Profile1D {
  std::vector<double> t;
  std::vector<double> U;
  std::vector<double> dU;  // sqrt(2 W(U)) at the samples
};

// Connecting orbit with evaluation anywhere on the line: cubic Hermite between
// stored samples, exponential tails beyond them (rates sqrt(W''(+-1))).
class Heteroclinic {
 public:
  Heteroclinic(const PotentialSpec& spec, double t_max, int n);

  double eval(double t) const;
  double deriv(double t) const;  // sqrt(2 W(U(t)))
  const Profile1D& profile() const { return prof_; }
  double t_max() const { return t_max_; }

 private:
  const PotentialSpec* spec_;
  Profile1D prof_;
  double t_max_ = 0, dt_ = 0;
  double rate_pos_ = 0, rate_neg_ = 0;  // linearized decay rates at +-1
  double gap_pos_ = 0, gap_neg_ = 0;    // 1 -+ U at the outermost samples
};

// Solve U' = sqrt(2W(U)), U(0)=0 on [-t_max, t_max] with n uniform samples.
// Explicit Dormand-Prince 5(4) with step control; once 1-|U| < 1e-10 the
// linearized exponential closed form takes over.
Profile1D heteroclinic(const PotentialSpec& spec, double t_max, int n);

// Shared profile for a given potential (t_max 30, 6001 samples), cached.
const Heteroclinic& shared_heteroclinic(const PotentialSpec& spec);

// Compactly truncated profile: equals U on [-gamma,gamma], reaches -+1 at
// |t| = 2*gamma through the reparametrized branches U(gamma*t/(2*gamma -+ t)).
double truncated_profile(const PotentialSpec& spec, double gamma, double t);
double truncated_profile(const Heteroclinic& het, double gamma, double t);

struct PotentialAudit {
  bool ok = true;
  std::vector<std::string> failures;  // violated clause + location
  double min_interior_W = 0;          // min W on (-1,1) away from the wells
  double c_sqrtW = 0;                 // -sup (sqrt W)'' on the interior mesh
  double c_quad = 0, C_quad = 0;      // bounds of W/s^2 on |s| in [2,10]
  double d2W_plus = 0, d2W_minus = 0;
  double cw = 0;
};

// Samples the structural conditions on meshes: wells exactly at +-1 with
// positive curvature, positivity elsewhere, concavity of sqrt(W) on the
// interior mesh (excluding 1e-3 neighborhoods of +-1), and quadratic growth
// on |s| in [2,10]. Estimates are sampled, not proved.
PotentialAudit audit_potential(const PotentialSpec& spec);

}  // namespace anisoac
