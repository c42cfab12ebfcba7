#include "anisoac/potential.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "anisoac/quadrature.hpp"

namespace anisoac {

PotentialSpec PotentialSpec::quartic() {
  PotentialSpec p;
  p.family_ = Family::quartic;
  return p;
}

PotentialSpec PotentialSpec::cosine() {
  PotentialSpec p;
  p.family_ = Family::cosine;
  return p;
}

PotentialSpec PotentialSpec::custom(std::vector<double> poly_coeffs) {
  require(!poly_coeffs.empty(), "PotentialSpec: custom family needs coefficients");
  PotentialSpec p;
  p.family_ = Family::custom;
  p.coeffs_ = std::move(poly_coeffs);
  return p;
}

std::string PotentialSpec::family_name() const {
  switch (family_) {
    case Family::quartic: return "quartic";
    case Family::cosine: return "cosine";
    default: return "custom";
  }
}

double PotentialSpec::raw_W(double s) const {
  switch (family_) {
    case Family::quartic: {
      const double q = 1.0 - s * s;
      return 0.25 * q * q;
    }
    case Family::cosine:
      return 1.0 + std::cos(std::numbers::pi * s);
    default: {
      double acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
      return acc;
    }
  }
}

double PotentialSpec::raw_dW(double s) const {
  switch (family_) {
    case Family::quartic:
      return s * s * s - s;
    case Family::cosine:
      return -std::numbers::pi * std::sin(std::numbers::pi * s);
    default: {
      double acc = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 1;)
        acc = acc * s + double(k) * coeffs_[k];
      return acc;
    }
  }
}

double PotentialSpec::raw_d2W(double s) const {
  switch (family_) {
    case Family::quartic:
      return 3.0 * s * s - 1.0;
    case Family::cosine:
      return -std::numbers::pi * std::numbers::pi * std::cos(std::numbers::pi * s);
    default: {
      double acc = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 2;)
        acc = acc * s + double(k) * double(k - 1) * coeffs_[k];
      return acc;
    }
  }
}

void PotentialSpec::eval(double s, double& W, double& dW, double& d2W) const {
  require_finite(s, "PotentialSpec::eval");
  if (std::abs(s) <= glue_at_) {
    W = raw_W(s);
    dW = raw_dW(s);
    d2W = raw_d2W(s);
    return;
  }
  const double b = s > 0 ? glue_at_ : -glue_at_;
  const double W0 = raw_W(b), d1 = raw_dW(b), d2 = raw_d2W(b);
  const double u = s - b;
  W = W0 + d1 * u + 0.5 * d2 * u * u;
  dW = d1 + d2 * u;
  d2W = d2;
}

double PotentialSpec::W(double s) const {
  double w, d, dd;
  eval(s, w, d, dd);
  return w;
}
double PotentialSpec::dW(double s) const {
  double w, d, dd;
  eval(s, w, d, dd);
  return d;
}
double PotentialSpec::d2W(double s) const {
  double w, d, dd;
  eval(s, w, d, dd);
  return dd;
}

double PotentialSpec::cw() const {
  if (cw_) return *cw_;
  const auto f = [this](double s) { return std::sqrt(std::max(0.0, 2.0 * W(s))); };
  const double v = integrate_adaptive(f, -1.0, 1.0, 1e-11);
  require(v > 0, "cw: transition cost must be positive");
  cw_ = v;
  return v;
}

// --- heteroclinic -----------------------------------------------------------

namespace {

// Dormand-Prince 5(4) step for the autonomous scalar ODE u' = f(u).
template <typename F>
void dopri5(F&& f, double& u, double dt, double& u5, double& err) {
  const double k1 = f(u);
  const double k2 = f(u + dt * (1.0 / 5) * k1);
  const double k3 = f(u + dt * (3.0 / 40 * k1 + 9.0 / 40 * k2));
  const double k4 = f(u + dt * (44.0 / 45 * k1 - 56.0 / 15 * k2 + 32.0 / 9 * k3));
  const double k5 = f(u + dt * (19372.0 / 6561 * k1 - 25360.0 / 2187 * k2 +
                                64448.0 / 6561 * k3 - 212.0 / 729 * k4));
  const double k6 = f(u + dt * (9017.0 / 3168 * k1 - 355.0 / 33 * k2 +
                                46732.0 / 5247 * k3 + 49.0 / 176 * k4 -
                                5103.0 / 18656 * k5));
  u5 = u + dt * (35.0 / 384 * k1 + 500.0 / 1113 * k3 + 125.0 / 192 * k4 -
                 2187.0 / 6784 * k5 + 11.0 / 84 * k6);
  const double k7 = f(u5);
  const double u4 = u + dt * (5179.0 / 57600 * k1 + 7571.0 / 16695 * k3 +
                              393.0 / 640 * k4 - 92097.0 / 339200 * k5 +
                              187.0 / 2100 * k6 + 1.0 / 40 * k7);
  err = std::abs(u5 - u4);
}

// March the solution from (t0,u0) to t1 > t0 with adaptive steps. Switches to
// the linearized exponential form near the well at `sign`.
double march(const PotentialSpec& spec, double t0, double u0, double t1, int sign) {
  const double rate = std::sqrt(std::max(spec.d2W(double(sign)), 1e-300));
  const auto f = [&](double u) { return std::sqrt(std::max(0.0, 2.0 * spec.W(u))); };
  double t = t0, u = u0;
  double dt = std::min(1e-3, t1 - t0);
  const double rtol = 1e-12, atol = 1e-13;
  int guard = 0;
  while (t < t1) {
    if (1.0 - sign * u < 1e-10) {
      // exponential approach to the well
      return sign * (1.0 - (1.0 - sign * u) * std::exp(-rate * (t1 - t)));
    }
    dt = std::min(dt, t1 - t);
    double u5, err;
    dopri5(f, u, dt, u5, err);
    const double tol = atol + rtol * std::abs(u);
    if (err <= tol) {
      t += dt;
      u = u5;
      dt *= std::clamp(0.9 * std::pow(tol / std::max(err, 1e-300), 0.2), 1.0, 5.0);
    } else {
      dt *= std::max(0.9 * std::pow(tol / err, 0.2), 0.2);
    }
    if (++guard > 2000000) throw std::runtime_error("heteroclinic: step control failure");
  }
  return u;
}

}  // namespace

Profile1D heteroclinic(const PotentialSpec& spec, double t_max, int n) {
  require(t_max > 0, "heteroclinic: t_max must be positive");
  require(n >= 2, "heteroclinic: need at least two samples");
  require(spec.W(0.0) > 0, "heteroclinic: W must be positive at 0");
  Profile1D prof;
  prof.t.resize(std::size_t(n));
  prof.U.resize(std::size_t(n));
  prof.dU.resize(std::size_t(n));
  for (int i = 0; i < n; ++i)
    prof.t[std::size_t(i)] = -t_max + 2.0 * t_max * double(i) / double(n - 1);

  // forward sweep from 0, then backward; the backward branch integrates the
  // reflected ODE v' = sqrt(2 W(-v)) so both directions march forward in time
  double u = 0.0, t = 0.0;
  std::vector<std::pair<std::size_t, double>> todo;
  for (int i = 0; i < n; ++i) {
    const double ti = prof.t[std::size_t(i)];
    if (ti >= 0) todo.push_back({std::size_t(i), ti});
  }
  std::sort(todo.begin(), todo.end(),
            [](auto& a, auto& b) { return a.second < b.second; });
  for (auto& [idx, ti] : todo) {
    if (ti > t) {
      u = march(spec, t, u, ti, +1);
      t = ti;
    }
    prof.U[idx] = u;
  }

  double v = 0.0;
  t = 0.0;
  todo.clear();
  for (int i = 0; i < n; ++i) {
    const double ti = prof.t[std::size_t(i)];
    if (ti < 0) todo.push_back({std::size_t(i), -ti});
  }
  std::sort(todo.begin(), todo.end(),
            [](auto& a, auto& b) { return a.second < b.second; });
  // v(tau) := -U(-tau) solves v' = sqrt(2 W(-v)), v(0) = 0
  struct Reflect {
    const PotentialSpec* s;
    double W(double x) const { return s->W(-x); }
    double d2W(double x) const { return s->d2W(-x); }
    double dW(double x) const { return -s->dW(-x); }
  };
  Reflect rf{&spec};
  const double rate_m = std::sqrt(std::max(rf.d2W(1.0), 1e-300));
  const auto fr = [&](double x) { return std::sqrt(std::max(0.0, 2.0 * rf.W(x))); };
  for (auto& [idx, tau] : todo) {
    if (tau > t) {
      // inline march for the reflected system
      double dt = std::min(1e-3, tau - t);
      const double rtol = 1e-12, atol = 1e-13;
      int guard = 0;
      while (t < tau) {
        if (1.0 - v < 1e-10) {
          v = 1.0 - (1.0 - v) * std::exp(-rate_m * (tau - t));
          t = tau;
          break;
        }
        dt = std::min(dt, tau - t);
        double v5, err;
        dopri5(fr, v, dt, v5, err);
        const double tol = atol + rtol * std::abs(v);
        if (err <= tol) {
          t += dt;
          v = v5;
          dt *= std::clamp(0.9 * std::pow(tol / std::max(err, 1e-300), 0.2), 1.0, 5.0);
        } else {
          dt *= std::max(0.9 * std::pow(tol / err, 0.2), 0.2);
        }
        if (++guard > 2000000)
          throw std::runtime_error("heteroclinic: step control failure");
      }
    }
    prof.U[idx] = -v;
  }

  for (int i = 0; i < n; ++i) {
    const double Ui = prof.U[std::size_t(i)];
    prof.dU[std::size_t(i)] = std::sqrt(std::max(0.0, 2.0 * spec.W(Ui)));
  }
  return prof;
}

Heteroclinic::Heteroclinic(const PotentialSpec& spec, double t_max, int n)
    : spec_(&spec), prof_(heteroclinic(spec, t_max, n)), t_max_(t_max) {
  dt_ = 2.0 * t_max / double(n - 1);
  rate_pos_ = std::sqrt(std::max(spec.d2W(1.0), 1e-300));
  rate_neg_ = std::sqrt(std::max(spec.d2W(-1.0), 1e-300));
  gap_pos_ = 1.0 - prof_.U.back();
  gap_neg_ = 1.0 + prof_.U.front();
}

double Heteroclinic::eval(double t) const {
  if (t >= t_max_) return 1.0 - gap_pos_ * std::exp(-rate_pos_ * (t - t_max_));
  if (t <= -t_max_) return -1.0 + gap_neg_ * std::exp(-rate_neg_ * (-t - t_max_));
  const double s = (t + t_max_) / dt_;
  std::size_t i = std::min(std::size_t(s), prof_.U.size() - 2);
  const double x = s - double(i);
  const double u0 = prof_.U[i], u1 = prof_.U[i + 1];
  const double m0 = prof_.dU[i] * dt_, m1 = prof_.dU[i + 1] * dt_;
  const double x2 = x * x, x3 = x2 * x;
  return (2 * x3 - 3 * x2 + 1) * u0 + (x3 - 2 * x2 + x) * m0 +
         (-2 * x3 + 3 * x2) * u1 + (x3 - x2) * m1;
}

double Heteroclinic::deriv(double t) const {
  return std::sqrt(std::max(0.0, 2.0 * spec_->W(eval(t))));
}

const Heteroclinic& shared_heteroclinic(const PotentialSpec& spec) {
  static std::mutex mu;
  static std::map<std::pair<int, std::vector<double>>, std::unique_ptr<Heteroclinic>>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(int(spec.family()), spec.coeffs());
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(std::move(key),
                       std::make_unique<Heteroclinic>(spec, 30.0, 6001)).first;
  }
  return *it->second;
}

double truncated_profile(const Heteroclinic& het, double gamma, double t) {
  require(gamma > 0, "truncated_profile: gamma must be positive");
  require_finite(t, "truncated_profile");
  if (t <= -2.0 * gamma) return -1.0;
  if (t >= 2.0 * gamma) return 1.0;
  if (t >= -gamma && t <= gamma) return het.eval(t);
  if (t > gamma) return het.eval(gamma * t / (2.0 * gamma - t));
  return het.eval(gamma * t / (2.0 * gamma + t));
}

double truncated_profile(const PotentialSpec& spec, double gamma, double t) {
  return truncated_profile(shared_heteroclinic(spec), gamma, t);
}

// --- audit ------------------------------------------------------------------

PotentialAudit audit_potential(const PotentialSpec& spec) {
  PotentialAudit a;
  auto fail = [&](const std::string& msg) {
    a.ok = false;
    a.failures.push_back(msg);
  };

  for (int sgn : {+1, -1}) {
    const double s = double(sgn);
    const double W = spec.W(s), dW = spec.dW(s), d2W = spec.d2W(s);
    if (std::abs(W) > 1e-12) fail("W(" + std::to_string(sgn) + ") != 0");
    if (std::abs(dW) > 1e-10) fail("W'(" + std::to_string(sgn) + ") != 0");
    if (d2W <= 0) fail("W''(" + std::to_string(sgn) + ") <= 0");
    (sgn > 0 ? a.d2W_plus : a.d2W_minus) = d2W;
  }

  // positivity away from the wells
  a.min_interior_W = std::numeric_limits<double>::infinity();
  const int mpos = 6000;
  for (int i = 0; i <= mpos; ++i) {
    const double s = -3.0 + 6.0 * double(i) / mpos;
    if (std::abs(std::abs(s) - 1.0) < 1e-3) continue;
    const double W = spec.W(s);
    if (std::abs(s) < 1.0) a.min_interior_W = std::min(a.min_interior_W, W);
    if (W <= 0) {
      fail("W <= 0 at s=" + std::to_string(s));
      break;
    }
  }

  // concavity of sqrt(W) on the interior mesh:
  // (sqrt W)'' = (2 W W'' - W'^2) / (4 W^{3/2})
  double worst = -std::numeric_limits<double>::infinity();
  double worst_at = 0;
  const int mint = 20000;
  for (int i = 0; i <= mint; ++i) {
    const double s = -1.0 + 1e-3 + (2.0 - 2e-3) * double(i) / mint;
    double W, dW, d2W;
    spec.eval(s, W, dW, d2W);
    if (W <= 0) continue;
    const double val = (2.0 * W * d2W - dW * dW) / (4.0 * std::pow(W, 1.5));
    if (val > worst) {
      worst = val;
      worst_at = s;
    }
  }
  a.c_sqrtW = -worst;
  if (!(worst < 0))
    fail("(sqrt W)'' not uniformly negative on the interior mesh, worst at s=" +
         std::to_string(worst_at));

  // quadratic growth window and one-sided slope signs
  a.c_quad = std::numeric_limits<double>::infinity();
  a.C_quad = 0;
  bool slope_ok = true;
  const int mq = 4000;
  for (int i = 0; i <= mq; ++i) {
    const double mag = 2.0 + 8.0 * double(i) / mq;
    for (int sgn : {+1, -1}) {
      const double s = sgn * mag;
      const double ratio = spec.W(s) / (s * s);
      a.c_quad = std::min(a.c_quad, ratio);
      a.C_quad = std::max(a.C_quad, ratio);
      const double dW = spec.dW(s);
      if (sgn > 0 && !(dW > 0 && dW <= a.C_quad * 4 * s + 1e3)) slope_ok = false;
      if (sgn < 0 && !(dW < 0)) slope_ok = false;
    }
  }
  if (!(a.c_quad > 0)) fail("quadratic lower bound fails on |s| in [2,10]");
  if (!slope_ok) fail("W' sign condition fails outside [-1,1]");

  if (a.ok) a.cw = spec.cw();
  return a;
}

}  // namespace anisoac
