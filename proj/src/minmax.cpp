#include "anisoac/minmax.hpp"

#include <algorithm>
#include <cmath>

namespace anisoac {

void PathOfFields::validate() const {
  require(K() >= 3, "PathOfFields: need at least 3 nodes");
  for (int side : {0, K() - 1}) {
    const double want = side == 0 ? -1.0 : 1.0;
    for (double x : nodes[std::size_t(side)].v)
      require(x == want, "PathOfFields: endpoints must be the exact constants -1/+1");
  }
}

void PathOfFields::recompute_energies(const EnergyParams& p) {
  energies.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) energies[i] = energy(nodes[i], p);
}

int PathOfFields::argmax() const {
  return int(std::max_element(energies.begin(), energies.end()) - energies.begin());
}

PathOfFields init_sweep_path(const EnergyParams& p, int axis, int K, double gamma,
                             double min_width) {
  const Grid& g = *p.grid;
  require(axis >= 0 && axis < g.dim, "init_sweep_path: bad axis");
  require(K >= 8, "init_sweep_path: need at least 8 nodes");
  require(gamma > 0, "init_sweep_path: gamma must be positive");
  Vec e{};
  e[axis] = 1.0;
  const double Fdir = p.integrand->f_base(e);
  const double wfloor = 4.0 * p.epsilon * Fdir;
  if (min_width <= 0) min_width = wfloor;
  require(min_width >= wfloor, "init_sweep_path: band width below 4*eps*F rejected");
  const double L = g.lengths[axis];
  require(min_width < 0.5 * L, "init_sweep_path: band width too large for the period");

  const Heteroclinic& het = shared_heteroclinic(*p.potential);
  const double center = 0.5 * L;
  const double scale = p.epsilon * Fdir;

  auto band = [&](double w) {
    ScalarField u(g);
    const std::int64_t N = g.size();
    for (std::int64_t i = 0; i < N; ++i) {
      const Vec x = g.position(g.coords(i));
      const double dist = std::abs(g.per_delta(center, x[axis], axis));
      u[i] = truncated_profile(het, gamma, (0.5 * w - dist) / scale);
    }
    return u;
  };

  PathOfFields path;
  path.nodes.reserve(std::size_t(K));
  const int ramp = std::max(1, K / 8);
  const ScalarField first = band(min_width);
  const ScalarField last = band(L - min_width);
  const std::int64_t N = g.size();
  for (int k = 0; k < K; ++k) {
    if (k <= ramp) {
      const double s = double(k) / ramp;
      ScalarField u(g);
      for (std::int64_t i = 0; i < N; ++i) u[i] = (1 - s) * (-1.0) + s * first[i];
      path.nodes.push_back(std::move(u));
    } else if (k >= K - 1 - ramp) {
      const double s = double(k - (K - 1 - ramp)) / ramp;
      ScalarField u(g);
      for (std::int64_t i = 0; i < N; ++i) u[i] = (1 - s) * last[i] + s * 1.0;
      path.nodes.push_back(std::move(u));
    } else {
      const double f = double(k - ramp) / double(K - 1 - 2 * ramp);
      path.nodes.push_back(band(min_width + f * (L - 2 * min_width)));
    }
  }
  // pin endpoints to the exact constants
  for (std::int64_t i = 0; i < N; ++i) {
    path.nodes.front()[i] = -1.0;
    path.nodes.back()[i] = 1.0;
  }
  path.recompute_energies(p);
  return path;
}

PathRelaxer::PathRelaxer(PathOfFields path, const EnergyParams& p, RelaxOptions opts)
    : path_(std::move(path)), p_(&p), opts_(opts) {
  path_.validate();
  path_.recompute_energies(p);
  node_dt.assign(path_.nodes.size(), default_flow_dt(p));
  climb_dt = default_flow_dt(p);
  prev_max = *std::max_element(path_.energies.begin(), path_.energies.end());
}

void PathRelaxer::descend_node(int i) {
  ScalarField& u = path_.nodes[std::size_t(i)];
  double& E = path_.energies[std::size_t(i)];
  double& dt = node_dt[std::size_t(i)];
  const std::int64_t N = p_->grid->size();
  for (int s = 0; s < opts_.descent_steps; ++s) {
    ScalarField g = grad_energy(u, *p_);
    const double g2 = p_->inner_w(g, g);
    if (g2 == 0) return;
    ScalarField trial(*p_->grid);
    bool ok = false;
    for (int bt = 0; bt < 30; ++bt) {
      for (std::int64_t q = 0; q < N; ++q) trial[q] = u[q] - dt * g[q];
      const double Et = energy(trial, *p_);
      if (Et <= E - 1e-4 * dt * g2) {
        u = std::move(trial);
        trial = ScalarField(*p_->grid);
        E = Et;
        dt *= 1.2;
        ok = true;
        break;
      }
      dt *= 0.5;
    }
    if (!ok) return;
  }
}

void PathRelaxer::reparametrize() {
  const int K = path_.K();
  const std::int64_t N = p_->grid->size();
  std::vector<double> s(std::size_t(K), 0.0);
  for (int i = 1; i < K; ++i) {
    ScalarField diff(*p_->grid);
    for (std::int64_t q = 0; q < N; ++q)
      diff[q] = path_.nodes[std::size_t(i)][q] - path_.nodes[std::size_t(i - 1)][q];
    s[std::size_t(i)] = s[std::size_t(i - 1)] + p_->norm_w(diff);
  }
  const double total = s.back();
  if (total <= 0) return;
  std::vector<ScalarField> fresh;
  fresh.reserve(std::size_t(K));
  fresh.push_back(path_.nodes.front());
  for (int i = 1; i < K - 1; ++i) {
    const double target = total * double(i) / double(K - 1);
    const auto it = std::upper_bound(s.begin(), s.end(), target);
    int j = int(std::min<std::ptrdiff_t>(std::max<std::ptrdiff_t>(it - s.begin(), 1),
                                         K - 1));
    const double seg = s[std::size_t(j)] - s[std::size_t(j - 1)];
    const double t = seg > 0 ? (target - s[std::size_t(j - 1)]) / seg : 0.0;
    ScalarField u(*p_->grid);
    for (std::int64_t q = 0; q < N; ++q)
      u[q] = (1 - t) * path_.nodes[std::size_t(j - 1)][q] +
             t * path_.nodes[std::size_t(j)][q];
    fresh.push_back(std::move(u));
  }
  fresh.push_back(path_.nodes.back());
  path_.nodes = std::move(fresh);
  path_.recompute_energies(*p_);
}

RoundStat PathRelaxer::round() {
  const int K = path_.K();
  const std::int64_t N = p_->grid->size();
  for (int i = 1; i < K - 1; ++i) descend_node(i);
  reparametrize();

  const int m = path_.argmax();
  RoundStat st;
  st.round = round_idx_;
  st.argmax = m;

  // climbing update on the argmax node
  ScalarField g = grad_energy(path_.nodes[std::size_t(m)], *p_);
  ScalarField tau(*p_->grid);
  double resid = norm_sup(g);
  if (m > 0 && m < K - 1) {
    for (std::int64_t q = 0; q < N; ++q)
      tau[q] = path_.nodes[std::size_t(m + 1)][q] - path_.nodes[std::size_t(m - 1)][q];
    const double nt = p_->norm_w(tau);
    if (nt > 0)
      for (std::int64_t q = 0; q < N; ++q) tau[q] /= nt;
    const double gt = p_->inner_w(g, tau);
    ScalarField perp(*p_->grid);
    for (std::int64_t q = 0; q < N; ++q) perp[q] = g[q] - gt * tau[q];
    resid = norm_sup(perp);

    if (round_idx_ >= opts_.climb_after && resid >= opts_.tol) {
      ScalarField dir(*p_->grid);
      for (std::int64_t q = 0; q < N; ++q) dir[q] = g[q] - 2.0 * gt * tau[q];
      double dt = climb_dt;
      const double dsup = norm_sup(dir);
      if (dsup * dt > opts_.max_climb_move) dt = opts_.max_climb_move / dsup;
      ScalarField trial(*p_->grid);
      bool moved = false;
      for (int bt = 0; bt < 12; ++bt) {
        for (std::int64_t q = 0; q < N; ++q)
          trial[q] = path_.nodes[std::size_t(m)][q] - dt * dir[q];
        const double Et = energy(trial, *p_);
        if (Et <= prev_max * (1.0 + 1e-9) + 1e-12) {
          path_.nodes[std::size_t(m)] = std::move(trial);
          trial = ScalarField(*p_->grid);
          path_.energies[std::size_t(m)] = Et;
          climb_dt = std::min(dt * 1.2, 1e6 * default_flow_dt(*p_));
          moved = true;
          break;
        }
        dt *= 0.5;
      }
      if (moved) {
        g = grad_energy(path_.nodes[std::size_t(m)], *p_);
        const double gt2 = p_->inner_w(g, tau);
        for (std::int64_t q = 0; q < N; ++q) perp[q] = g[q] - gt2 * tau[q];
        resid = norm_sup(perp);
      }
    }
  }

  const int am = path_.argmax();
  st.argmax = am;
  st.max_energy = path_.energies[std::size_t(am)];
  st.residual = resid;
  prev_max = st.max_energy;  // next round's climb may not exceed this
  if (resid < opts_.tol) converged_ = true;
  ++round_idx_;
  st.round = round_idx_;
  return st;
}

RelaxResult relax_path(PathOfFields& path, const EnergyParams& p,
                       const RelaxOptions& opts,
                       const std::function<void(const RoundStat&, const PathRelaxer&)>&
                           round_cb) {
  PathRelaxer rel(std::move(path), p, opts);
  RoundStat st;
  for (int r = 0; r < opts.rounds; ++r) {
    st = rel.round();
    if (round_cb) round_cb(st, rel);
    if (rel.converged()) break;
  }
  path = rel.path();
  RelaxResult out;
  out.minmax_value = st.max_energy;
  out.argmax = st.argmax;
  out.converged = rel.converged();
  out.rounds_done = rel.rounds_done();
  return out;
}

double minmax_value(const PathOfFields& path) {
  require(!path.energies.empty(), "minmax_value: energies not computed");
  return *std::max_element(path.energies.begin(), path.energies.end());
}

std::pair<ScalarField, CriticalReport> extract_saddle(const PathOfFields& path,
                                                      const EnergyParams& p,
                                                      const NewtonOptions& opts) {
  const int m = path.argmax();
  require(m > 0 && m + 1 < path.K(), "extract_saddle: argmax at an endpoint");
  return newton_refine(path.nodes[std::size_t(m)], p, opts);
}

}  // namespace anisoac
