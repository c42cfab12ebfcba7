#pragma once

#include <functional>

#include "anisoac/energy.hpp"

namespace anisoac {

// Certificate data for a (near-)critical point.
struct CriticalReport {
  double residual_sup = 0;
  double residual_l2 = 0;
  double energy = 0;
  std::vector<double> eigenvalues;     // ascending
  std::vector<double> eig_residuals;   // ||H v - lambda v||_w per pair
  int morse_index = 0;                 // eigenvalues certified below -1e-6/eps
  double max_overshoot = 0;            // max |u| - 1
  int newton_iters = 0;
  bool converged = false;
};

// Residual of the discrete Euler-Lagrange operator; coincides with
// grad_energy in the per-unit-volume-weight representation, so a critical
// point is exactly a zero of this field.
ScalarField el_residual(const ScalarField& u, const EnergyParams& p);

struct FlowTrace {
  int step = 0;
  double energy = 0;
  double residual_sup = 0;
  double dt = 0;
};

struct FlowResult {
  ScalarField u;
  std::vector<FlowTrace> trace;
  bool converged = false;
  int steps = 0;
  double final_energy = 0;
  double final_residual = 0;
};

// Explicit gradient descent with Armijo backtracking; the energy decreases on
// every accepted step. Stops when the sup-norm of the residual drops below
// tol. dt0 <= 0 selects eps*h^2/4.
FlowResult gradient_flow(const ScalarField& u0, const EnergyParams& p, double dt0,
                         int max_steps, double tol, int log_every = 0);

double default_flow_dt(const EnergyParams& p);

struct NewtonOptions {
  double tol = 1e-12;       // sup-norm of the residual
  int max_iter = 50;
  int minres_max = 4000;
  double minres_rtol_floor = 1e-12;
  int spectrum_k = 6;       // 0 skips the eigenvalue certificate
  int spectrum_max_iter = 800;
  double step_cap = 1e3;    // cap on ||d||_w
};

// Damped Newton with matrix-free MINRES inner solves; converges to saddles as
// well as minima. The returned report carries the residual, energy, overshoot
// and (optionally) the low part of the spectrum.
std::pair<ScalarField, CriticalReport> newton_refine(const ScalarField& u0,
                                                     const EnergyParams& p,
                                                     const NewtonOptions& opts = {});

struct SpectrumResult {
  std::vector<double> values;      // k smallest Ritz values, ascending
  std::vector<double> residuals;   // ||H v - theta v||_w
  std::vector<ScalarField> vectors;
  int iterations = 0;
  double hnorm_est = 0;
  bool converged = false;
};

// Lanczos with full reorthogonalization on the matrix-free Hessian; returns
// the k smallest eigenvalue estimates with residual norms. Requires delta > 0
// and k <= 10. Deterministic (fixed internal seed).
SpectrumResult spectrum(const ScalarField& u, const EnergyParams& p, int k,
                        int max_iter = 800, double rtol = 1e-8);

// Count of certified negative directions: eigenvalues below -1e-6/eps.
int morse_index_estimate(const SpectrumResult& s, double epsilon);

// Symmetric (possibly indefinite) solver in the volume-weighted inner
// product; returns the achieved relative residual.
double minres(const std::function<void(const ScalarField&, ScalarField&)>& apply,
              const ScalarField& b, ScalarField& x, const EnergyParams& p,
              double rtol, int max_iter);

}  // namespace anisoac
