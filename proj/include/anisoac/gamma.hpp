#pragma once

#include "anisoac/energy.hpp"

namespace anisoac {

// Parametric shapes on the torus; the shape is the -1 phase, the complement
// the +1 phase. The boundary must fit inside one period.
struct ShapeSpec {
  enum class Kind { stripe, ball, ellipse };
  Kind kind = Kind::stripe;
  int axis = 0;          // stripe: normal axis
  double center1 = 0.5;  // stripe: center coordinate along `axis`
  double width = 0.25;   // stripe width
  Vec center{0.5, 0.5, 0.5};
  double radius = 0.25;       // ball
  Vec semi_axes{0.3, 0.2, 0};  // ellipse (2D)

  static ShapeSpec stripe(int axis, double center, double width);
  static ShapeSpec ball(const Vec& center, double r);
  static ShapeSpec ellipse(const Vec& center, double a, double b);

  // Signed distance (positive outside), nearest boundary point and outward
  // unit normal there. Periodic in the ambient torus.
  void project(const Grid& g, const Vec& x, double& dist, Vec& bdry, Vec& nu) const;
  // Normal-injectivity radius including the periodic cut locus.
  double reach(const Grid& g) const;
};

// Pointwise H(u) with H(t) the cumulative transition cost integral from 0 to
// t; cached 2e4-node table with monotone cubic interpolation.
ScalarField h_transform(const ScalarField& u, const PotentialSpec& spec);
double h_eval(const PotentialSpec& spec, double t);

// Discrete anisotropic BV mass: sum of F(x, grad w) * cell volume, using the
// same spatial factor as the energy. By one-homogeneity this is the total
// variation weighted by F, and for w = H(u) it is dominated by the energy.
double bv_mass_aniso(const ScalarField& w, const EnergyParams& p);

// Boundary quadrature of F(x, nu) over the shape boundary, adaptive to 1e-8.
double aniso_perimeter(const ShapeSpec& S, const Grid& g, const IntegrandSpec& F);

// Truncated-profile ansatz around the shape boundary: +1 outside, -1 inside,
// transition of width ~ eps*F per the local normal. The 2*gamma band must
// stay within the reach of the boundary.
ScalarField recovery_field(const ShapeSpec& S, const EnergyParams& p, double gamma);

struct GammaRow {
  double epsilon = 0;
  double gamma = 0;
  double energy = 0;
  double target = 0;  // c_W * aniso_perimeter
  double gap = 0;     // |energy - target| / target
};

struct GammaSweep {
  std::vector<GammaRow> rows;
  bool gaps_decreasing = false;  // within a 1.2x noise factor
};

// Energies of recovery fields along decreasing eps against c_W * F-perimeter.
// gamma_rule <= 0 selects min(2 log(1/eps), 0.45 * reach / (eps * Fmax)).
GammaSweep gamma_sweep(const ShapeSpec& S, const Grid& g, const PotentialSpec& W,
                       const IntegrandSpec& F, const std::vector<double>& eps_list,
                       double gamma_fixed = 0);

}  // namespace anisoac
