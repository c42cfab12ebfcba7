#include "anisoac/critical.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace anisoac {

ScalarField el_residual(const ScalarField& u, const EnergyParams& p) {
  return grad_energy(u, p);
}

double default_flow_dt(const EnergyParams& p) {
  double hmin = p.grid->h[0];
  for (int a = 1; a < p.grid->dim; ++a) hmin = std::min(hmin, p.grid->h[a]);
  return p.epsilon * hmin * hmin / 4.0;
}

FlowResult gradient_flow(const ScalarField& u0, const EnergyParams& p, double dt0,
                         int max_steps, double tol, int log_every) {
  FlowResult res;
  res.u = u0;
  double dt = dt0 > 0 ? dt0 : default_flow_dt(p);
  const double dt_cap = dt * 1e6;
  double E = energy(res.u, p);
  const std::int64_t N = p.grid->size();

  for (int step = 0; step < max_steps; ++step) {
    ScalarField g = grad_energy(res.u, p);
    const double rsup = norm_sup(g);
    if (log_every > 0 && step % log_every == 0)
      res.trace.push_back({step, E, rsup, dt});
    if (rsup < tol) {
      res.converged = true;
      res.steps = step;
      res.final_energy = E;
      res.final_residual = rsup;
      return res;
    }
    const double g2 = p.inner_w(g, g);
    ScalarField trial(*p.grid);
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      for (std::int64_t i = 0; i < N; ++i) trial[i] = res.u[i] - dt * g[i];
      const double Et = energy(trial, p);
      if (Et <= E - 1e-4 * dt * g2) {
        res.u = std::move(trial);
        trial = ScalarField(*p.grid);
        E = Et;
        dt = std::min(dt * 1.25, dt_cap);
        accepted = true;
        break;
      }
      dt *= 0.5;
    }
    if (!accepted) throw std::runtime_error("gradient_flow: line-search failure");
  }
  ScalarField g = grad_energy(res.u, p);
  res.final_residual = norm_sup(g);
  res.final_energy = E;
  res.steps = max_steps;
  res.converged = res.final_residual < tol;
  return res;
}

// --- MINRES ------------------------------------------------------------------

double minres(const std::function<void(const ScalarField&, ScalarField&)>& apply,
              const ScalarField& b, ScalarField& x, const EnergyParams& p,
              double rtol, int max_iter) {
  const Grid& g = *p.grid;
  const std::int64_t N = g.size();
  x = ScalarField(g);
  const double beta1 = p.norm_w(b);
  if (beta1 == 0) return 0.0;

  ScalarField v(g), v_prev(g), z(g), w(g), w1(g), w2(g);
  for (std::int64_t i = 0; i < N; ++i) v[i] = b[i] / beta1;
  double beta = beta1, eta = beta1;
  double c0 = 1, c1 = 1, s0 = 0, s1 = 0;
  double relres = 1.0;

  for (int j = 0; j < max_iter; ++j) {
    apply(v, z);
    const double alpha = p.inner_w(v, z);
    for (std::int64_t i = 0; i < N; ++i) z[i] -= alpha * v[i] + beta * v_prev[i];
    const double beta_next = p.norm_w(z);

    const double delta = c1 * alpha - c0 * s1 * beta;
    const double rho1 = std::sqrt(delta * delta + beta_next * beta_next);
    const double rho2 = s1 * alpha + c0 * c1 * beta;
    const double rho3 = s0 * beta;
    if (rho1 == 0) break;
    const double c2 = delta / rho1, s2 = beta_next / rho1;

    for (std::int64_t i = 0; i < N; ++i) {
      const double wi = (v[i] - rho3 * w2[i] - rho2 * w1[i]) / rho1;
      x[i] += c2 * eta * wi;
      w2[i] = w1[i];
      w1[i] = wi;
    }
    eta = -s2 * eta;
    relres = std::abs(eta) / beta1;
    if (relres <= rtol) break;
    if (beta_next < 1e-300) break;

    v_prev = v;
    for (std::int64_t i = 0; i < N; ++i) v[i] = z[i] / beta_next;
    beta = beta_next;
    c0 = c1;
    c1 = c2;
    s0 = s1;
    s1 = s2;
  }
  return relres;
}

// --- Newton -------------------------------------------------------------------

std::pair<ScalarField, CriticalReport> newton_refine(const ScalarField& u0,
                                                     const EnergyParams& p,
                                                     const NewtonOptions& opts) {
  require(p.delta > 0, "newton_refine: needs delta > 0");
  const std::int64_t N = p.grid->size();
  ScalarField u = u0;
  CriticalReport rep;

  ScalarField gcur = grad_energy(u, p);
  double rsup = norm_sup(gcur);
  int it = 0;
  for (; it < opts.max_iter && rsup >= opts.tol; ++it) {
    HessOperator H(u, p);
    ScalarField rhs(*p.grid);
    for (std::int64_t i = 0; i < N; ++i) rhs[i] = -gcur[i];
    ScalarField d(*p.grid);
    const double forcing =
        std::max(opts.minres_rtol_floor, std::min(0.1, std::sqrt(rsup)));
    minres([&H](const ScalarField& in, ScalarField& out) { H.apply(in, out); }, rhs, d,
           p, forcing, opts.minres_max);

    const double dnorm = p.norm_w(d);
    if (!(dnorm > 0) || !std::isfinite(dnorm))
      throw std::runtime_error("newton_refine: inner solver breakdown");
    if (dnorm > opts.step_cap) {
      const double sc = opts.step_cap / dnorm;
      for (std::int64_t i = 0; i < N; ++i) d[i] *= sc;
    }

    double t = 1.0;
    bool accepted = false;
    ScalarField trial(*p.grid);
    for (int bt = 0; bt < 10; ++bt) {
      for (std::int64_t i = 0; i < N; ++i) trial[i] = u[i] + t * d[i];
      ScalarField gt = grad_energy(trial, p);
      const double rt = norm_sup(gt);
      if (rt < rsup * (1.0 - 0.25 * t) || rt < opts.tol) {
        u = std::move(trial);
        trial = ScalarField(*p.grid);
        gcur = std::move(gt);
        rsup = rt;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // stalled; report what we have
  }

  rep.newton_iters = it;
  rep.residual_sup = rsup;
  rep.residual_l2 = p.norm_w(gcur);
  rep.energy = energy(u, p);
  rep.converged = rsup < opts.tol;
  double over = 0;
  for (std::int64_t i = 0; i < N; ++i) over = std::max(over, std::abs(u[i]) - 1.0);
  rep.max_overshoot = over;

  if (opts.spectrum_k > 0) {
    SpectrumResult s = spectrum(u, p, opts.spectrum_k, opts.spectrum_max_iter);
    rep.eigenvalues = s.values;
    rep.eig_residuals = s.residuals;
    rep.morse_index = morse_index_estimate(s, p.epsilon);
  }
  return {std::move(u), rep};
}

// --- Lanczos ------------------------------------------------------------------

SpectrumResult spectrum(const ScalarField& u, const EnergyParams& p, int k,
                        int max_iter, double rtol) {
  require(p.delta > 0, "spectrum: needs delta > 0");
  require(k >= 1 && k <= 10, "spectrum: k must lie in 1..10");
  const Grid& g = *p.grid;
  const std::int64_t N = g.size();
  require(max_iter > k, "spectrum: max_iter too small");
  max_iter = int(std::min<std::int64_t>(max_iter, N));

  HessOperator H(u, p);
  SpectrumResult out;

  // deterministic start vector
  std::mt19937_64 rng(0x5eedULL);
  std::vector<ScalarField> V;
  V.reserve(std::size_t(max_iter) + 1);
  {
    ScalarField v0(g);
    for (std::int64_t i = 0; i < N; ++i) v0[i] = uniform(rng, -1.0, 1.0);
    const double n0 = p.norm_w(v0);
    for (std::int64_t i = 0; i < N; ++i) v0[i] /= n0;
    V.push_back(std::move(v0));
  }

  std::vector<double> alpha, beta;  // T diag and offdiag
  ScalarField w(g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  int m = 0;
  bool converged = false;

  auto tridiag_eigs = [&](int mm) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(mm, mm);
    for (int i = 0; i < mm; ++i) {
      T(i, i) = alpha[std::size_t(i)];
      if (i + 1 < mm) T(i, i + 1) = T(i + 1, i) = beta[std::size_t(i)];
    }
    es.compute(T);
  };

  for (m = 0; m < max_iter; ++m) {
    H.apply(V[std::size_t(m)], w);
    const double a = p.inner_w(w, V[std::size_t(m)]);
    alpha.push_back(a);
    for (std::int64_t i = 0; i < N; ++i) {
      w[i] -= a * V[std::size_t(m)][i];
      if (m > 0) w[i] -= beta[std::size_t(m - 1)] * V[std::size_t(m - 1)][i];
    }
    // full reorthogonalization (two classical Gram-Schmidt passes)
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= m; ++i) {
        const double c = p.inner_w(w, V[std::size_t(i)]);
        for (std::int64_t j = 0; j < N; ++j) w[j] -= c * V[std::size_t(i)][j];
      }
    const double b = p.norm_w(w);

    const bool check = (m >= k && (m % 25 == 24 || m + 1 == max_iter || b < 1e-13));
    if (check) {
      tridiag_eigs(m + 1);
      const auto& ev = es.eigenvalues();
      out.hnorm_est = std::max(std::abs(ev(0)), std::abs(ev(m)));
      bool all_ok = true;
      for (int i = 0; i < k && i <= m; ++i) {
        const double rest = b * std::abs(es.eigenvectors()(m, i));
        if (rest > rtol * std::max(out.hnorm_est, 1e-30)) all_ok = false;
      }
      if (all_ok && m + 1 >= k) {
        converged = true;
        ++m;
        break;
      }
    }
    if (b < 1e-13) {  // invariant subspace found
      tridiag_eigs(m + 1);
      converged = (m + 1 >= k);
      ++m;
      break;
    }
    beta.push_back(b);
    ScalarField vn(g);
    for (std::int64_t i = 0; i < N; ++i) vn[i] = w[i] / b;
    V.push_back(std::move(vn));
  }
  if (es.info() != Eigen::Success || int(es.eigenvalues().size()) != m) tridiag_eigs(m);

  const int kk = std::min(k, m);
  out.values.resize(std::size_t(kk));
  out.residuals.resize(std::size_t(kk));
  out.vectors.reserve(std::size_t(kk));
  for (int i = 0; i < kk; ++i) {
    out.values[std::size_t(i)] = es.eigenvalues()(i);
    ScalarField y(g);
    for (int j = 0; j < m; ++j) {
      const double c = es.eigenvectors()(j, i);
      for (std::int64_t q = 0; q < N; ++q) y[q] += c * V[std::size_t(j)][q];
    }
    const double ny = p.norm_w(y);
    for (std::int64_t q = 0; q < N; ++q) y[q] /= ny;
    H.apply(y, w);
    for (std::int64_t q = 0; q < N; ++q) w[q] -= out.values[std::size_t(i)] * y[q];
    out.residuals[std::size_t(i)] = p.norm_w(w);
    out.vectors.push_back(std::move(y));
  }
  out.iterations = m;
  out.converged = converged;
  if (!converged && m >= max_iter)
    out.hnorm_est = std::max(out.hnorm_est, 1e-30);
  return out;
}

int morse_index_estimate(const SpectrumResult& s, double epsilon) {
  int idx = 0;
  for (double v : s.values)
    if (v < -1e-6 / epsilon) ++idx;
  return idx;
}

}  // namespace anisoac
