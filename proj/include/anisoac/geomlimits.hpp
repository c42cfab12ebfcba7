#pragma once

#include <map>

#include "anisoac/energy.hpp"

namespace anisoac {

// Diffuse interface measure: weight sqrt(2W(u)) |grad u| per cell with the
// unit normal grad u / |grad u| where the gradient is above the floor.
struct GridMeasure {
  const Grid* grid = nullptr;
  std::vector<double> weight;
  VectorField normal;
  std::vector<char> has_normal;
};

GridMeasure build_varifold(const ScalarField& u, const EnergyParams& p,
                           double grad_floor = 1e-12);

double varifold_mass(const GridMeasure& V, const EnergyParams& p);
double varifold_mass_ball(const GridMeasure& V, const EnergyParams& p, const Vec& center,
                          double r);
// ||V||(B_r(x)) normalized by the (dim-1)-ball volume omega_{dim-1} r^{dim-1},
// so a flat unit-density interface through x gives the transition cost c_W.
std::vector<double> density_ratios(const GridMeasure& V, const EnergyParams& p,
                                   const Vec& x, const std::vector<double>& r_list);
// Anisotropic mass: integral of F(x, nu) dV; pointwise equal to
// sqrt(2W(u)) F(x, grad u), which never exceeds the energy density.
double varifold_mass_aniso(const GridMeasure& V, const EnergyParams& p);

// Pointwise gap eps*F^2(grad u)/2 - W(u)/eps with the raw integrand F
// (not its mollification). Nonpositive up to a constant at critical points.
struct ModicaReport {
  ScalarField discrepancy;
  double max_discrepancy = 0;
  double positive_part_mass = 0;
};
ModicaReport modica_check(const ScalarField& u, const EnergyParams& p);

// First variations of the diffuse measure under the flow of X.
double first_variation_iso(const GridMeasure& V, const VectorField& X,
                           const EnergyParams& p);
double first_variation_aniso(const GridMeasure& V, const VectorField& X,
                             const EnergyParams& p);

// Dense (1,1)-tensor samples per cell.
struct TensorField {
  const Grid* grid = nullptr;
  int dim = 0;
  std::vector<double> t;  // dim*dim entries per cell, row-major

  TensorField() = default;
  TensorField(const Grid& g)
      : grid(&g), dim(g.dim), t(std::size_t(g.size()) * g.dim * g.dim, 0.0) {}
  double& at(std::int64_t i, int a, int b) {
    return t[(std::size_t(i) * dim + a) * dim + b];
  }
  double at(std::int64_t i, int a, int b) const {
    return t[(std::size_t(i) * dim + a) * dim + b];
  }
};

// Stress-energy tensor e_eps*I - eps * grad u (x) D(F^2/2)(grad u), raw F.
TensorField stress_tensor(const ScalarField& u, const EnergyParams& p);

// Integral of <T, DX> = sum_ab T_ab d_b X_a; vanishes for critical points of
// autonomous flat energies up to discretization, and is O(eps |grad u|^2 |X|)
// otherwise.
double divergence_test(const TensorField& T, const VectorField& X,
                       const EnergyParams& p);

// Twelve-field trigonometric test basis for variation/divergence checks.
std::vector<VectorField> trig_test_fields(const Grid& g);
double c1_norm(const VectorField& X);

// Pointwise split of the stress tensor: lambda = min(eps F^2 / e, 1) and the
// map C_F(nu) = I - nu (x) DF(nu)/F(nu) (zero where the gradient vanishes).
struct CFSplit {
  ScalarField lambda;
  TensorField cf;
};
CFSplit cf_split(const ScalarField& u, const EnergyParams& p, double grad_floor = -1);

// Level-set second fundamental form against the energy: LHS integrates
// phi^2 |II_u|^2 eps F_delta(grad u)^2, RHS the total energy. |II_u| is the
// tangential Hessian over |grad u| on {|grad u| > tau}, zero elsewhere.
struct StabilityReport {
  double lhs = 0;
  double rhs = 0;
  double ratio = 0;
};
StabilityReport stability_diagnostic(const ScalarField& u, const EnergyParams& p,
                                     const ScalarField& phi, double tau);

// Energy of 1D slices along closed lines with integer winding; the normalized
// energy concentrates near integer multiples of c_W for almost-1D fields.
struct SliceRecord {
  Vec base{};
  double q = 0;             // integral of chi * e_eps along the line
  double q_normalized = 0;  // q / (c_W * F(base, dir))
  int nearest_k = 0;
  double residual = 0;      // |q_normalized - nearest_k|
  double tangential_fraction = 0;
  bool certified = false;
};

struct SliceOptions {
  int samples_per_cell = 4;
  // chi == 1 on the whole closed line by default; a plateau window otherwise
  double chi_center = -1.0;
  double chi_halfwidth = 0.0;
  double chi_falloff = 0.0;
  double tangential_max_fraction = 0.1;
  double empty_line_floor = 1e-7;  // below this line energy, k = 0 and certified
};

struct SliceQuantization {
  std::vector<SliceRecord> lines;
  std::map<int, int> histogram;  // over certified lines
  int modal_k = 0;
  double certified_fraction = 0;
};

SliceQuantization slice_quantization(const ScalarField& u, const EnergyParams& p,
                                     const std::array<int, 3>& winding,
                                     const SliceOptions& opts = {});

// Gradient energy split against a direction: integral of eps |P_perp grad u|^2
// (tangential part) and of eps |grad u|^2 (total).
struct TangentialEnergy {
  double tangential = 0;
  double total = 0;
  double fraction() const { return total > 0 ? tangential / total : 0.0; }
};
TangentialEnergy tangential_energy(const ScalarField& u, const EnergyParams& p,
                                   const Vec& dir);

// Zero level set extraction: segments in 2D (marching squares), triangles in
// 3D (marching tetrahedra), crossings in 1D. Normals oriented by grad u.
struct InterfaceElement {
  Vec midpoint{};
  double measure = 0;  // length (2D) or area (3D), 1 for a point (1D)
  Vec normal{};
};

struct Interface {
  std::vector<InterfaceElement> elements;
  double total_measure = 0;
};

Interface extract_interface(const ScalarField& u, double level = 0.0);

}  // namespace anisoac
