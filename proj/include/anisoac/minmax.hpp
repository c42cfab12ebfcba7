#pragma once

#include <functional>

#include "anisoac/critical.hpp"

namespace anisoac {

// Discretized admissible path between the two constant phases. Endpoints are
// pinned to the constants -1 and +1 and never move.
struct PathOfFields {
  std::vector<ScalarField> nodes;
  std::vector<double> energies;

  int K() const { return int(nodes.size()); }
  void validate() const;  // endpoints exactly constant, K >= 3
  void recompute_energies(const EnergyParams& p);
  int argmax() const;
};

// Nucleation-and-sweep initial path: a band of the +1 phase bounded by two
// truncated-profile fronts grows across the torus along the given axis, with
// linear ramps from/to the constants at the ends. min_width below
// 4*eps*F(axis) is rejected.
PathOfFields init_sweep_path(const EnergyParams& p, int axis, int K,
                             double gamma = 4.0, double min_width = 0.0);

struct RoundStat {
  int round = 0;
  double max_energy = 0;
  int argmax = 0;
  double residual = 0;  // transverse residual sup-norm at the argmax node
};

struct RelaxOptions {
  int rounds = 400;
  double tol = 1e-6;
  int descent_steps = 2;
  int climb_after = 25;   // rounds of plain descent before the climbing step
  double max_climb_move = 0.1;  // sup-norm cap per climbing update
};

// String-of-nodes relaxation: per round (i) Armijo descent on the interior
// nodes, (ii) arclength reparametrization in the L2_w metric, (iii) a
// climbing update on the argmax node (ascent along the path tangent, descent
// transversally), guarded so the path maximum does not increase beyond
// line-search tolerance. Endpoints stay pinned.
class PathRelaxer {
 public:
  PathRelaxer(PathOfFields path, const EnergyParams& p, RelaxOptions opts = {});

  RoundStat round();
  const PathOfFields& path() const { return path_; }
  PathOfFields& mutable_path() { return path_; }
  bool converged() const { return converged_; }
  int rounds_done() const { return round_idx_; }

  // relaxation state for exact checkpoint/resume
  std::vector<double> node_dt;
  double climb_dt = 0;
  double prev_max = 0;
  int round_idx_ = 0;

 private:
  void descend_node(int i);
  void reparametrize();
  PathOfFields path_;
  const EnergyParams* p_;
  RelaxOptions opts_;
  bool converged_ = false;
};

struct RelaxResult {
  double minmax_value = 0;
  int argmax = 0;
  bool converged = false;
  int rounds_done = 0;
};

// Drive the relaxer until the argmax node's transverse residual drops below
// tol or rounds run out (best-so-far returned with converged=false).
// round_cb, when set, observes every round (logging / checkpointing).
RelaxResult relax_path(PathOfFields& path, const EnergyParams& p,
                       const RelaxOptions& opts = {},
                       const std::function<void(const RoundStat&, const PathRelaxer&)>&
                           round_cb = nullptr);

double minmax_value(const PathOfFields& path);

// Newton refinement from the argmax node, with the usual certificates.
std::pair<ScalarField, CriticalReport> extract_saddle(const PathOfFields& path,
                                                      const EnergyParams& p,
                                                      const NewtonOptions& opts = {});

}  // namespace anisoac
