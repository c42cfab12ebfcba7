#pragma once

#include "anisoac/grid.hpp"
#include "anisoac/integrand.hpp"
#include "anisoac/potential.hpp"

namespace anisoac {

// Phase-field functional on the periodic grid:
//   E(u) = sum_cells vol * omega * [ eps/4 * s(x) * (Gb(D+u) + Gb(D-u)) + W(u)/eps ]
// where D+/D- are the one-sided difference gradients, Gb is F^2 (delta = 0,
// C^1 path) or its mollification G_delta (delta > 0, smooth path), omega the
// conformal volume weight and s(x) = exp(-2 phi) * m(x)^2 collects the
// inverse-metric factor and the integrand's spatial multiplier. Averaging the
// two one-sided evaluations keeps the scheme second order (the O(h) terms
// cancel by symmetry) while its quadratic form carries the compact stencil:
// the wide centered stencil decouples the even/odd sublattices and pollutes
// Hessian certificates with spurious near-zero doublets at coarse eps/h.
//
// Gradients and Hessians are the exact derivatives of this discrete sum (the
// sum is differentiated, not the continuum operator), represented per cell
// against the volume-weighted inner product: d/dt E(u + t v) = <grad, v>_w.
struct EnergyParams {
  const Grid* grid = nullptr;
  const PotentialSpec* potential = nullptr;
  const IntegrandSpec* integrand = nullptr;
  const MollifiedIntegrand* moll = nullptr;  // required when delta > 0
  const ConformalMetric* metric = nullptr;   // nullptr = flat
  double epsilon = 0.1;
  double delta = 0.0;

  // caches (filled by the constructor)
  std::vector<double> volw;                  // omega per cell
  std::vector<double> sfac;                  // exp(-2 phi) * m(x)^2 per cell
  std::vector<double> cellw;                 // vol * omega per cell
  std::array<std::vector<std::int64_t>, 3> up, dn;  // periodic neighbor tables

  EnergyParams(const Grid& g, const PotentialSpec& W, const IntegrandSpec& F,
               double eps, double delta_ = 0.0,
               const MollifiedIntegrand* moll_ = nullptr,
               const ConformalMetric* metric_ = nullptr);

  // Centered difference of u at cell i, padded Vec; the sampling used by the
  // pointwise geometric diagnostics.
  Vec du_at(const ScalarField& u, std::int64_t i) const;

  // One-sided differences at cell i.
  Vec du_fwd(const ScalarField& u, std::int64_t i) const;
  Vec du_bwd(const ScalarField& u, std::int64_t i) const;

  double inner_w(const ScalarField& a, const ScalarField& b) const;
  double norm_w(const ScalarField& a) const { return std::sqrt(std::max(0.0, inner_w(a, a))); }
};

double energy(const ScalarField& u, const EnergyParams& p);
ScalarField energy_density(const ScalarField& u, const EnergyParams& p);

// Density with the raw integrand F regardless of p.delta; the geometric
// diagnostics are phrased in terms of F itself.
ScalarField energy_density_rawF(const ScalarField& u, const EnergyParams& p);

ScalarField grad_energy(const ScalarField& u, const EnergyParams& p);

// Matrix-free second derivative at a fixed base point u. Construction
// precomputes the per-cell Hessians of the integrand so repeated applications
// (Krylov iterations) are cheap.
class HessOperator {
 public:
  HessOperator(const ScalarField& u, const EnergyParams& p);
  void apply(const ScalarField& w, ScalarField& out) const;
  ScalarField apply(const ScalarField& w) const;
  const EnergyParams& params() const { return *p_; }

 private:
  const EnergyParams* p_;
  const Grid* grid_;
  std::vector<double> d2g_;  // per cell, dim x dim, includes (eps/2)*omega*s
  std::vector<double> wpp_;  // W''(u)/eps per cell
};

ScalarField hess_apply(const ScalarField& u, const ScalarField& v,
                       const EnergyParams& p);

}  // namespace anisoac
