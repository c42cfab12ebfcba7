#include "anisoac/energy.hpp"

#include <cmath>

namespace anisoac {

EnergyParams::EnergyParams(const Grid& g, const PotentialSpec& W,
                           const IntegrandSpec& F, double eps, double delta_,
                           const MollifiedIntegrand* moll_,
                           const ConformalMetric* metric_)
    : grid(&g),
      potential(&W),
      integrand(&F),
      moll(moll_),
      metric(metric_),
      epsilon(eps),
      delta(delta_) {
  require(eps > 0 && eps <= 1.0, "EnergyParams: epsilon must lie in (0,1]");
  require(delta >= 0 && delta < 1.0, "EnergyParams: delta must lie in [0,1)");
  require(F.dim() == g.dim, "EnergyParams: integrand dimension mismatch");
  if (delta > 0) {
    require(moll != nullptr, "EnergyParams: delta > 0 needs a MollifiedIntegrand");
    require(std::abs(moll->delta() - delta) < 1e-14,
            "EnergyParams: mollification delta mismatch");
  }
  if (metric) require(metric->grid->same_layout(g), "EnergyParams: metric grid mismatch");

  const std::int64_t N = g.size();
  volw.resize(std::size_t(N));
  sfac.resize(std::size_t(N));
  cellw.resize(std::size_t(N));
  const double vol = g.cell_volume();
  for (std::int64_t i = 0; i < N; ++i) {
    const double w = metric ? metric->volw[std::size_t(i)] : 1.0;
    const double gw = metric ? metric->gradw[std::size_t(i)] : 1.0;
    const double m = F.modulation(g.position(g.coords(i)));
    volw[std::size_t(i)] = w;
    sfac[std::size_t(i)] = gw * m * m;
    cellw[std::size_t(i)] = vol * w;
  }
  for (int a = 0; a < g.dim; ++a) {
    up[a].resize(std::size_t(N));
    dn[a].resize(std::size_t(N));
    for (std::int64_t i = 0; i < N; ++i) {
      up[a][std::size_t(i)] = g.shift(i, a, +1);
      dn[a][std::size_t(i)] = g.shift(i, a, -1);
    }
  }
}

Vec EnergyParams::du_at(const ScalarField& u, std::int64_t i) const {
  Vec d{};
  for (int a = 0; a < grid->dim; ++a)
    d[a] = (u[up[a][std::size_t(i)]] - u[dn[a][std::size_t(i)]]) / (2.0 * grid->h[a]);
  return d;
}

Vec EnergyParams::du_fwd(const ScalarField& u, std::int64_t i) const {
  Vec d{};
  for (int a = 0; a < grid->dim; ++a)
    d[a] = (u[up[a][std::size_t(i)]] - u[i]) / grid->h[a];
  return d;
}

Vec EnergyParams::du_bwd(const ScalarField& u, std::int64_t i) const {
  Vec d{};
  for (int a = 0; a < grid->dim; ++a)
    d[a] = (u[i] - u[dn[a][std::size_t(i)]]) / grid->h[a];
  return d;
}

double EnergyParams::inner_w(const ScalarField& a, const ScalarField& b) const {
  std::vector<double> prod(a.v.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = a.v[i] * b.v[i] * cellw[i];
  return pairwise_sum(prod);
}

namespace {
inline double gb_value(const EnergyParams& p, const Vec& d) {
  return p.delta > 0 ? p.moll->g_base(d, false).G : p.integrand->fsq_base(d);
}
inline Vec gb_diff(const EnergyParams& p, const Vec& d) {
  return p.delta > 0 ? p.moll->g_base(d, false).dG : p.integrand->dfsq_base(d);
}
}  // namespace

double energy(const ScalarField& u, const EnergyParams& p) {
  const std::int64_t N = p.grid->size();
  std::vector<double> dens(std::size_t(N), 0.0);
  const double ieps = 1.0 / p.epsilon;
  for (std::int64_t i = 0; i < N; ++i) {
    const double gb = gb_value(p, p.du_fwd(u, i)) + gb_value(p, p.du_bwd(u, i));
    dens[std::size_t(i)] =
        p.cellw[std::size_t(i)] *
        (0.25 * p.epsilon * p.sfac[std::size_t(i)] * gb + p.potential->W(u[i]) * ieps);
  }
  return pairwise_sum(dens);
}

ScalarField energy_density(const ScalarField& u, const EnergyParams& p) {
  ScalarField out(*p.grid);
  const std::int64_t N = p.grid->size();
  const double ieps = 1.0 / p.epsilon;
  for (std::int64_t i = 0; i < N; ++i) {
    const double gb = gb_value(p, p.du_fwd(u, i)) + gb_value(p, p.du_bwd(u, i));
    out[i] = 0.25 * p.epsilon * p.sfac[std::size_t(i)] * gb +
             p.potential->W(u[i]) * ieps;
  }
  return out;
}

ScalarField energy_density_rawF(const ScalarField& u, const EnergyParams& p) {
  ScalarField out(*p.grid);
  const std::int64_t N = p.grid->size();
  const double ieps = 1.0 / p.epsilon;
  for (std::int64_t i = 0; i < N; ++i) {
    const Vec d = p.du_at(u, i);
    out[i] = 0.5 * p.epsilon * p.sfac[std::size_t(i)] * p.integrand->fsq_base(d) +
             p.potential->W(u[i]) * ieps;
  }
  return out;
}

ScalarField grad_energy(const ScalarField& u, const EnergyParams& p) {
  const Grid& g = *p.grid;
  const std::int64_t N = g.size();
  const int dim = g.dim;
  // per-cell covectors of both one-sided branches, all weights included
  VectorField Pf(g), Pb(g);
  const double quarter_eps = 0.25 * p.epsilon;
  for (std::int64_t i = 0; i < N; ++i) {
    const double c = quarter_eps * p.volw[std::size_t(i)] * p.sfac[std::size_t(i)];
    const Vec df = gb_diff(p, p.du_fwd(u, i));
    const Vec db = gb_diff(p, p.du_bwd(u, i));
    for (int a = 0; a < dim; ++a) {
      Pf.at(a, i) = c * df[a];
      Pb.at(a, i) = c * db[a];
    }
  }
  ScalarField out(g);
  const double ieps = 1.0 / p.epsilon;
  for (std::int64_t i = 0; i < N; ++i) out[i] = p.potential->dW(u[i]) * ieps;
  for (int a = 0; a < dim; ++a) {
    const double ih = 1.0 / g.h[a];
    const double* pf = Pf.v.data() + std::size_t(a) * N;
    const double* pb = Pb.v.data() + std::size_t(a) * N;
    for (std::int64_t i = 0; i < N; ++i) {
      out[i] += (pf[p.dn[a][std::size_t(i)]] - pf[i] + pb[i] -
                 pb[p.up[a][std::size_t(i)]]) *
                ih / p.volw[std::size_t(i)];
    }
  }
  return out;
}

HessOperator::HessOperator(const ScalarField& u, const EnergyParams& p)
    : p_(&p), grid_(p.grid) {
  require(p.delta > 0, "HessOperator: second derivatives need delta > 0");
  const std::int64_t N = grid_->size();
  const int dim = grid_->dim;
  d2g_.resize(std::size_t(N) * dim * dim * 2);
  wpp_.resize(std::size_t(N));
  const double ieps = 1.0 / p.epsilon;
  for (std::int64_t i = 0; i < N; ++i) {
    const double c = 0.25 * p.epsilon * p.volw[std::size_t(i)] * p.sfac[std::size_t(i)];
    const GEval gf = p.moll->g_base(p.du_fwd(u, i), true);
    const GEval gb = p.moll->g_base(p.du_bwd(u, i), true);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) {
        d2g_[((std::size_t(i) * 2 + 0) * dim + a) * dim + b] =
            c * 0.5 * (gf.d2G[a][b] + gf.d2G[b][a]);
        d2g_[((std::size_t(i) * 2 + 1) * dim + a) * dim + b] =
            c * 0.5 * (gb.d2G[a][b] + gb.d2G[b][a]);
      }
    wpp_[std::size_t(i)] = p.potential->d2W(u[i]) * ieps;
  }
}

void HessOperator::apply(const ScalarField& w, ScalarField& out) const {
  const Grid& g = *grid_;
  const std::int64_t N = g.size();
  const int dim = g.dim;
  VectorField Qf(g), Qb(g);
  for (std::int64_t i = 0; i < N; ++i) {
    Vec dwf{}, dwb{};
    for (int a = 0; a < dim; ++a) {
      dwf[a] = (w[p_->up[a][std::size_t(i)]] - w[i]) / g.h[a];
      dwb[a] = (w[i] - w[p_->dn[a][std::size_t(i)]]) / g.h[a];
    }
    for (int a = 0; a < dim; ++a) {
      double sf = 0, sb = 0;
      for (int b = 0; b < dim; ++b) {
        sf += d2g_[((std::size_t(i) * 2 + 0) * dim + a) * dim + b] * dwf[b];
        sb += d2g_[((std::size_t(i) * 2 + 1) * dim + a) * dim + b] * dwb[b];
      }
      Qf.at(a, i) = sf;
      Qb.at(a, i) = sb;
    }
  }
  if (out.grid != grid_) out = ScalarField(g);
  for (std::int64_t i = 0; i < N; ++i) out[i] = wpp_[std::size_t(i)] * w[i];
  for (int a = 0; a < dim; ++a) {
    const double ih = 1.0 / g.h[a];
    const double* qf = Qf.v.data() + std::size_t(a) * N;
    const double* qb = Qb.v.data() + std::size_t(a) * N;
    for (std::int64_t i = 0; i < N; ++i)
      out[i] += (qf[p_->dn[a][std::size_t(i)]] - qf[i] + qb[i] -
                 qb[p_->up[a][std::size_t(i)]]) *
                ih / p_->volw[std::size_t(i)];
  }
}

ScalarField HessOperator::apply(const ScalarField& w) const {
  ScalarField out(*grid_);
  apply(w, out);
  return out;
}

ScalarField hess_apply(const ScalarField& u, const ScalarField& v,
                       const EnergyParams& p) {
  return HessOperator(u, p).apply(v);
}

}  // namespace anisoac
