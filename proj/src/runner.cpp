#include "anisoac/runner.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "anisoac/critical.hpp"
#include "anisoac/gamma.hpp"
#include "anisoac/geomlimits.hpp"
#include "anisoac/io.hpp"
#include "anisoac/minmax.hpp"

namespace anisoac {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

EnergyParams Assembly::params() const {
  return EnergyParams(*grid, *potential, *integrand, epsilon, delta, moll.get(),
                      metric.get());
}

Assembly Assembly::at_delta(double new_delta, int quad_order) const {
  Assembly out = *this;
  out.delta = new_delta;
  out.moll = new_delta > 0 ? std::make_shared<MollifiedIntegrand>(*integrand, new_delta,
                                                                  quad_order)
                           : nullptr;
  return out;
}

Assembly assemble(const Config& cfg) {
  Assembly A;
  const int dim = cfg.get_int("grid.dim", 2);
  auto cells_list = cfg.get_list("grid.cells", {128});
  auto len_list = cfg.get_list("grid.lengths", {1.0});
  std::array<int, 3> cells{1, 1, 1};
  std::array<double, 3> lengths{1, 1, 1};
  for (int a = 0; a < dim; ++a) {
    cells[std::size_t(a)] =
        int(cells_list[std::min(std::size_t(a), cells_list.size() - 1)]);
    lengths[std::size_t(a)] = len_list[std::min(std::size_t(a), len_list.size() - 1)];
  }
  A.grid = std::make_shared<Grid>(dim, cells, lengths);

  const double phi_amp = cfg.get_double("metric.phi_amplitude", 0.0);
  if (phi_amp != 0.0) {
    ScalarField phi(*A.grid);
    for (std::int64_t i = 0; i < A.grid->size(); ++i) {
      const Vec x = A.grid->position(A.grid->coords(i));
      double p = 1.0;
      for (int a = 0; a < dim; ++a)
        p *= std::cos(2.0 * std::numbers::pi * x[a] / lengths[std::size_t(a)]);
      phi[i] = phi_amp * p;
    }
    A.metric = std::make_shared<ConformalMetric>(std::move(phi));
  }

  const std::string wfam = cfg.get_string("potential.family", "quartic");
  if (wfam == "quartic") {
    A.potential = std::make_shared<PotentialSpec>(PotentialSpec::quartic());
  } else if (wfam == "cosine") {
    A.potential = std::make_shared<PotentialSpec>(PotentialSpec::cosine());
  } else if (wfam == "custom") {
    A.potential = std::make_shared<PotentialSpec>(
        PotentialSpec::custom(cfg.get_list("potential.coeffs", {0, 0, 1})));
  } else {
    throw std::invalid_argument("unknown potential.family: " + wfam);
  }

  const std::string ffam = cfg.get_string("integrand.family", "isotropic");
  if (ffam == "isotropic") {
    A.integrand = std::make_shared<IntegrandSpec>(IntegrandSpec::isotropic(dim));
  } else if (ffam == "quadratic") {
    std::vector<double> m = cfg.get_list("integrand.matrix", {});
    Mat M = zero_mat();
    if (m.empty()) {
      for (int a = 0; a < dim; ++a) M[a][a] = 1.0;
    } else {
      require(int(m.size()) == dim * dim,
              "integrand.matrix must have dim*dim entries (row-major)");
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) M[a][b] = m[std::size_t(a * dim + b)];
    }
    A.integrand = std::make_shared<IntegrandSpec>(IntegrandSpec::quadratic(dim, M));
  } else if (ffam == "quartic-mixture") {
    A.integrand = std::make_shared<IntegrandSpec>(
        IntegrandSpec::quartic_mixture(dim, cfg.get_double("integrand.beta", 1.0)));
  } else {
    throw std::invalid_argument("unknown integrand.family: " + ffam);
  }
  const double mod = cfg.get_double("integrand.modulation", 0.0);
  if (mod != 0.0) A.integrand->with_modulation(mod, lengths);

  A.epsilon = cfg.get_double("energy.epsilon", 1.0 / 16);
  A.delta = cfg.get_double("integrand.delta", 0.1);
  if (A.delta > 0)
    A.moll = std::make_shared<MollifiedIntegrand>(*A.integrand, A.delta,
                                                  cfg.get_int("integrand.quad_order", 12));
  return A;
}

ScalarField initial_field(const Config& cfg, const Assembly& A) {
  const Grid& g = *A.grid;
  const std::string kind = cfg.get_string("init.kind", "random");
  if (kind == "constant") {
    return ScalarField(g, cfg.get_double("init.value", -1.0));
  }
  if (kind == "random") {
    std::mt19937_64 rng(std::uint64_t(cfg.get_int("run.seed", 0)));
    const double base = cfg.get_double("init.value", 0.0);
    const double amp = cfg.get_double("init.amplitude", 0.1);
    ScalarField u(g);
    for (std::int64_t i = 0; i < g.size(); ++i) u[i] = base + amp * uniform(rng, -1, 1);
    return u;
  }
  if (kind == "stripe") {
    const int axis = cfg.get_int("init.axis", g.dim - 1);
    require(axis >= 0 && axis < g.dim, "init.axis out of range");
    const double L = g.lengths[axis];
    const double width = cfg.get_double("init.width", 0.5 * L);
    Vec e{};
    e[axis] = 1.0;
    const double scale = A.epsilon * A.integrand->f_base(e);
    const Heteroclinic& het = shared_heteroclinic(*A.potential);
    ScalarField u(g);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      const Vec x = g.position(g.coords(i));
      const double dist = std::abs(g.per_delta(0.5 * L, x[axis], axis));
      u[i] = truncated_profile(het, 6.0, (0.5 * width - dist) / scale);
    }
    return u;
  }
  if (kind == "snapshot") {
    const std::string path = cfg.get_string("init.snapshot", "");
    require(!path.empty(), "init.snapshot path required");
    Snapshot snap = read_snapshot(path);
    require(snap.grid->same_layout(g), "init.snapshot grid mismatch");
    return ScalarField(g, std::move(snap.field.v));
  }
  throw std::invalid_argument("unknown init.kind: " + kind);
}

// --- report plumbing ---------------------------------------------------------

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string hex64(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

class Manifest {
 public:
  Manifest(const std::string& outdir, const std::string& cmd, const Config& cfg)
      : outdir_(outdir), t0_(std::chrono::steady_clock::now()) {
    doc_["version"] = kVersion;
    doc_["command"] = cmd;
    doc_["config_hash"] = hex64(cfg.hash());
    doc_["seed"] = cfg.get_int("run.seed", 0);
    doc_["stages"] = json::object();
    doc_["artifacts"] = json::array();
  }
  void stage(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    doc_["stages"][name] = std::chrono::duration<double>(now - t0_).count();
    t0_ = now;
  }
  std::string artifact(const std::string& rel) {
    doc_["artifacts"].push_back(rel);
    return (fs::path(outdir_) / rel).string();
  }
  void finish() {
    atomic_write_text((fs::path(outdir_) / "run_manifest.json").string(),
                      doc_.dump(2) + "\n");
  }

 private:
  std::string outdir_;
  json doc_;
  std::chrono::steady_clock::time_point t0_;
};

json report_of(const CriticalReport& r) {
  json j;
  j["residual_sup"] = r.residual_sup;
  j["residual_l2"] = r.residual_l2;
  j["energy"] = r.energy;
  j["eigenvalues"] = r.eigenvalues;
  j["eig_residuals"] = r.eig_residuals;
  j["morse_index"] = r.morse_index;
  j["max_overshoot"] = r.max_overshoot;
  j["newton_iters"] = r.newton_iters;
  j["converged"] = r.converged;
  return j;
}

SnapshotMeta meta_of(const Assembly& A, std::map<std::string, std::string> tags) {
  SnapshotMeta m;
  m.dim = A.grid->dim;
  m.dims = A.grid->cells;
  m.lengths = A.grid->lengths;
  m.epsilon = A.epsilon;
  m.delta = A.delta;
  m.tags = std::move(tags);
  return m;
}

// --- checkpoints ---------------------------------------------------------------

constexpr char kCkptMagic[9] = "ACCKPT01";

void write_checkpoint(const std::string& path, const Assembly& A, int seed,
                      const PathRelaxer& rel) {
  json hdr;
  hdr["seed"] = seed;
  hdr["round"] = rel.round_idx_;
  hdr["K"] = rel.path().K();
  hdr["epsilon"] = A.epsilon;
  hdr["delta"] = A.delta;
  hdr["dims"] = std::vector<int>(A.grid->cells.begin(), A.grid->cells.begin() + A.grid->dim);
  hdr["lengths"] = std::vector<double>(A.grid->lengths.begin(),
                                       A.grid->lengths.begin() + A.grid->dim);
  hdr["node_dt"] = rel.node_dt;
  hdr["climb_dt"] = rel.climb_dt;
  hdr["prev_max"] = rel.prev_max;
  const std::string h = hdr.dump();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(bool(out), "checkpoint: cannot open " + tmp);
    out.write(kCkptMagic, 8);
    const std::uint64_t len = h.size();
    out.write(reinterpret_cast<const char*>(&len), 8);
    out.write(h.data(), std::streamsize(h.size()));
    for (const auto& node : rel.path().nodes)
      out.write(reinterpret_cast<const char*>(node.v.data()),
                std::streamsize(node.v.size() * sizeof(double)));
    require(bool(out), "checkpoint: short write");
  }
  fs::rename(tmp, path);
}

struct CheckpointData {
  json hdr;
  std::vector<std::vector<double>> nodes;
};

CheckpointData read_checkpoint(const std::string& path, const Grid& g) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  require(bool(in), "checkpoint: cannot open " + path);
  const std::int64_t bytes = in.tellg();
  in.seekg(0);
  char magic[8];
  in.read(magic, 8);
  require(bool(in) && std::string(magic, 8) == kCkptMagic, "checkpoint: bad magic");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 8);
  require(bool(in) && len < 1u << 20, "checkpoint: bad header length");
  std::string h(len, '\0');
  in.read(h.data(), std::streamsize(len));
  CheckpointData ck;
  ck.hdr = json::parse(h);
  const int K = ck.hdr.at("K").get<int>();
  const std::int64_t N = g.size();
  const std::int64_t expect = 16 + std::int64_t(len) + K * N * std::int64_t(sizeof(double));
  require(bytes == expect, "checkpoint: header/content length mismatch");
  ck.nodes.resize(std::size_t(K));
  for (int k = 0; k < K; ++k) {
    ck.nodes[std::size_t(k)].resize(std::size_t(N));
    in.read(reinterpret_cast<char*>(ck.nodes[std::size_t(k)].data()),
            std::streamsize(std::size_t(N) * sizeof(double)));
  }
  require(bool(in), "checkpoint: short read");
  return ck;
}

// --- subcommands ----------------------------------------------------------------

int cmd_heteroclinic(const Config& cfg, const std::string& outdir, Manifest& man) {
  const std::string fam = cfg.get_string("potential.family", "quartic");
  auto A = assemble(cfg);
  const double t_max = cfg.get_double("heteroclinic.t_max", 8.0);
  const int n = cfg.get_int("heteroclinic.n", 1601);
  Profile1D prof = heteroclinic(*A.potential, t_max, n);
  man.stage("solve");

  // centered-difference consistency of the stored derivative samples
  double fd_resid = 0;
  const double dt = prof.t[1] - prof.t[0];
  for (std::size_t i = 1; i + 1 < prof.U.size(); ++i) {
    const double fd = (prof.U[i + 1] - prof.U[i - 1]) / (2 * dt);
    fd_resid = std::max(fd_resid, std::abs(fd - prof.dU[i]) - dt * dt);
  }
  double equi = 0;
  for (std::size_t i = 0; i < prof.U.size(); ++i)
    equi = std::max(equi, std::abs(0.5 * prof.dU[i] * prof.dU[i] -
                                   A.potential->W(prof.U[i])));

  json rep;
  rep["family"] = fam;
  rep["t_max"] = t_max;
  rep["n"] = n;
  rep["cw"] = A.potential->cw();
  rep["U_at_0"] = prof.U[std::size_t((n - 1) / 2)];
  rep["U_at_tmax"] = prof.U.back();
  rep["equipartition_max_residual"] = equi;
  rep["fd_consistency"] = fd_resid;
  if (fam == "quartic") {
    double sup = 0;
    for (std::size_t i = 0; i < prof.U.size(); ++i)
      sup = std::max(sup, std::abs(prof.U[i] - std::tanh(prof.t[i] / std::sqrt(2.0))));
    rep["tanh_sup_error"] = sup;
  }
  {
    std::string csv = "t,U,dU\n";
    for (std::size_t i = 0; i < prof.U.size(); ++i)
      csv += fmt(prof.t[i]) + "," + fmt(prof.U[i]) + "," + fmt(prof.dU[i]) + "\n";
    atomic_write_text(man.artifact("profile.csv"), csv);
  }
  atomic_write_text(man.artifact("report.json"), rep.dump(2) + "\n");
  man.stage("report");
  return 0;
}

int cmd_audit(const Config& cfg, const std::string& outdir, Manifest& man) {
  auto A = assemble(cfg);
  PotentialAudit pa = audit_potential(*A.potential);
  man.stage("potential");
  IntegrandAudit ia = audit_integrand(*A.integrand, cfg.get_int("audit.samples", 200),
                                      std::uint64_t(cfg.get_int("run.seed", 0)),
                                      A.moll.get());
  man.stage("integrand");

  json rep;
  rep["potential"] = {{"ok", pa.ok},
                      {"failures", pa.failures},
                      {"min_interior_W", pa.min_interior_W},
                      {"c_sqrtW", pa.c_sqrtW},
                      {"c_quad", pa.c_quad},
                      {"C_quad", pa.C_quad},
                      {"d2W_plus", pa.d2W_plus},
                      {"d2W_minus", pa.d2W_minus},
                      {"cw", pa.cw}};
  rep["integrand"] = {{"ok", ia.ok},
                      {"failures", ia.failures},
                      {"lambda_est", ia.lambda_est},
                      {"lambda_prime_est", ia.lambda_prime_est},
                      {"worst_evenness", ia.worst_evenness},
                      {"worst_homogeneity", ia.worst_homogeneity},
                      {"min_d2g_eig", ia.min_d2g_eig}};
  atomic_write_text(man.artifact("report.json"), rep.dump(2) + "\n");
  man.stage("report");
  return (pa.ok && ia.ok) ? 0 : 2;
}

int cmd_minimize(const Config& cfg, const std::string& outdir, Manifest& man) {
  auto A = assemble(cfg);
  EnergyParams p = A.params();
  ScalarField u0 = initial_field(cfg, A);
  man.stage("setup");
  FlowResult fr = gradient_flow(u0, p, cfg.get_double("flow.dt", 0.0),
                                cfg.get_int("flow.steps", 20000),
                                cfg.get_double("flow.tol", 1e-9), 50);
  man.stage("flow");
  write_snapshot(man.artifact("final"), fr.u, meta_of(A, {{"kind", "minimizer"}}));
  json rep;
  rep["energy"] = fr.final_energy;
  rep["residual_sup"] = fr.final_residual;
  rep["steps"] = fr.steps;
  rep["converged"] = fr.converged;
  {
    std::string csv = "step,energy,residual_sup,dt\n";
    for (const auto& t : fr.trace)
      csv += std::to_string(t.step) + "," + fmt(t.energy) + "," + fmt(t.residual_sup) +
             "," + fmt(t.dt) + "\n";
    atomic_write_text(man.artifact("trace.csv"), csv);
  }
  atomic_write_text(man.artifact("report.json"), rep.dump(2) + "\n");
  man.stage("report");
  return fr.converged ? 0 : 2;
}

int cmd_mountain_pass(const Config& cfg, const std::string& outdir, Manifest& man) {
  auto A = assemble(cfg);
  require(A.delta > 0, "mountain-pass: integrand.delta must be positive");
  EnergyParams p = A.params();
  const int seed = cfg.get_int("run.seed", 0);
  const int axis = cfg.get_int("minmax.axis", A.grid->dim - 1);
  const int K = cfg.get_int("minmax.nodes", 33);
  RelaxOptions opts;
  opts.rounds = cfg.get_int("minmax.rounds", 400);
  opts.tol = cfg.get_double("minmax.tol", 1e-6);
  opts.descent_steps = cfg.get_int("minmax.descent_steps", 2);
  opts.climb_after = cfg.get_int("minmax.climb_after", 25);

  PathOfFields path;
  int start_round = 0;
  std::vector<double> saved_dt;
  double saved_climb_dt = -1, saved_prev_max = 0;
  const std::string resume = cfg.get_string("minmax.resume", "");
  if (!resume.empty()) {
    CheckpointData ck = read_checkpoint(resume, *A.grid);
    require(ck.hdr.at("seed").get<int>() == seed,
            "resume rejected: seed mismatch (checkpoint seed " +
                std::to_string(ck.hdr.at("seed").get<int>()) + ", config seed " +
                std::to_string(seed) + ")");
    const auto dims = ck.hdr.at("dims").get<std::vector<int>>();
    bool grid_ok = int(dims.size()) == A.grid->dim;
    for (int a = 0; grid_ok && a < A.grid->dim; ++a)
      grid_ok = dims[std::size_t(a)] == A.grid->cells[std::size_t(a)];
    require(grid_ok, "resume rejected: grid mismatch");
    for (auto& data : ck.nodes)
      path.nodes.emplace_back(*A.grid, std::move(data));
    start_round = ck.hdr.at("round").get<int>();
    saved_dt = ck.hdr.at("node_dt").get<std::vector<double>>();
    saved_climb_dt = ck.hdr.at("climb_dt").get<double>();
    saved_prev_max = ck.hdr.at("prev_max").get<double>();
  } else {
    path = init_sweep_path(p, axis, K, cfg.get_double("minmax.gamma", 4.0));
  }
  man.stage("init");

  PathRelaxer rel(std::move(path), p, opts);
  if (!resume.empty()) {
    rel.node_dt = saved_dt;
    rel.climb_dt = saved_climb_dt;
    rel.prev_max = saved_prev_max;
    rel.round_idx_ = start_round;
  }

  const int ckpt_every = cfg.get_int("minmax.checkpoint_every", 0);
  std::string csv = "round,max_energy,argmax,residual\n";
  RoundStat st;
  for (int r = rel.round_idx_; r < opts.rounds; ++r) {
    st = rel.round();
    csv += std::to_string(st.round) + "," + fmt(st.max_energy) + "," +
           std::to_string(st.argmax) + "," + fmt(st.residual) + "\n";
    if (ckpt_every > 0 && st.round % ckpt_every == 0)
      write_checkpoint((fs::path(outdir) / ("checkpoint_" + std::to_string(st.round) +
                                            ".ckpt"))
                           .string(),
                       A, seed, rel);
    if (rel.converged()) break;
  }
  atomic_write_text(man.artifact("rounds.csv"), csv);
  man.stage("relax");

  NewtonOptions nopt;
  nopt.tol = cfg.get_double("newton.tol", 1e-12);
  nopt.max_iter = cfg.get_int("newton.max_iter", 50);
  nopt.spectrum_k = cfg.get_int("spectrum.k", 6);
  nopt.spectrum_max_iter = cfg.get_int("spectrum.max_iter", 800);
  auto [saddle, crep] = extract_saddle(rel.path(), p, nopt);
  man.stage("newton");

  json rep;
  rep["minmax_value"] = minmax_value(rel.path());
  rep["relax_converged"] = rel.converged();
  rep["rounds"] = rel.rounds_done();
  rep["argmax"] = rel.path().argmax();
  rep["saddle"] = report_of(crep);
  rep["cw"] = A.potential->cw();
  {
    Vec e{};
    e[axis] = 1.0;
    rep["F_axis"] = A.integrand->f_base(e);
  }

  // re-refine the saddle while shrinking the smoothing scale
  json cont = json::array();
  ScalarField ucur = saddle;
  CriticalReport last = crep;
  for (double dc : cfg.get_list("minmax.delta_continuation", {})) {
    require(dc > 0 && dc < 1, "minmax.delta_continuation entries must lie in (0,1)");
    Assembly Ad = A.at_delta(dc, cfg.get_int("integrand.quad_order", 12));
    EnergyParams pd = Ad.params();
    auto [unew, rnew] = newton_refine(ucur, pd, nopt);
    ScalarField diff(*A.grid);
    for (std::int64_t i = 0; i < A.grid->size(); ++i) diff[i] = unew[i] - ucur[i];
    VectorField gdiff = grad(diff);
    double gsup = 0;
    for (double v : gdiff.v) gsup = std::max(gsup, std::abs(v));
    json row;
    row["delta"] = dc;
    row["report"] = report_of(rnew);
    row["change_sup"] = norm_sup(diff);
    row["change_grad_sup"] = gsup;
    cont.push_back(row);
    ucur = std::move(unew);
    last = rnew;
  }
  rep["continuation"] = cont;
  man.stage("continuation");

  write_snapshot(man.artifact("saddle"), ucur, meta_of(A, {{"kind", "saddle"}}));
  atomic_write_text(man.artifact("report.json"), rep.dump(2) + "\n");
  man.stage("report");

  const bool cert_ok = rel.converged() && last.converged &&
                       last.max_overshoot <= 1e-6 && last.morse_index <= 1;
  return cert_ok ? 0 : 2;
}

int cmd_spectrum(const Config& cfg, const std::string& outdir, Manifest& man) {
  auto A = assemble(cfg);
  require(A.delta > 0, "spectrum: integrand.delta must be positive");
  EnergyParams p = A.params();
  ScalarField u = initial_field(cfg, A);
  man.stage("setup");
  SpectrumResult s = spectrum(u, p, cfg.get_int("spectrum.k", 6),
                              cfg.get_int("spectrum.max_iter", 800),
                              cfg.get_double("spectrum.rtol", 1e-8));
  man.stage("lanczos");
  json rep;
  rep["eigenvalues"] = s.values;
  rep["residuals"] = s.residuals;
  rep["iterations"] = s.iterations;
  rep["hnorm_est"] = s.hnorm_est;
  rep["converged"] = s.converged;
  rep["morse_index"] = morse_index_estimate(s, p.epsilon);
  atomic_write_text(man.artifact("report.json"), rep.dump(2) + "\n");
  man.stage("report");
  return s.converged ? 0 : 2;
}

int cmd_diagnose(const Config& cfg, const std::string& outdir, Manifest& man) {
  auto A = assemble(cfg);
  ScalarField u = initial_field(cfg, A);
  if (cfg.has("diagnose.snapshot")) {
    Snapshot snap = read_snapshot(cfg.get_string("diagnose.snapshot", ""));
    require(snap.grid->same_layout(*A.grid), "diagnose: snapshot grid mismatch");
    u = ScalarField(*A.grid, std::move(snap.field.v));
  }
  EnergyParams p = A.params();
  man.stage("setup");

  json rep;
  const double E = energy(u, p);
  rep["energy"] = E;

  ModicaReport mr = modica_check(u, p);
  rep["modica"] = {{"max_discrepancy", mr.max_discrepancy},
                   {"positive_part_mass", mr.positive_part_mass}};
  man.stage("modica");

  IntegrandAudit ia = audit_integrand(*A.integrand, 100,
                                      std::uint64_t(cfg.get_int("run.seed", 0)),
                                      A.moll.get());
  GridMeasure V = build_varifold(u, p);
  const double mass = varifold_mass(V, p);
  const bool mass_ok = mass <= E / ia.lambda_prime_est + 1e-12;
  rep["varifold"] = {{"mass", mass},
                     {"mass_aniso", varifold_mass_aniso(V, p)},
                     {"lambda_prime", ia.lambda_prime_est},
                     {"mass_bound_ok", mass_ok}};

  // density ratios at the heaviest cell
  {
    std::int64_t imax = 0;
    for (std::int64_t i = 0; i < A.grid->size(); ++i)
      if (V.weight[std::size_t(i)] > V.weight[std::size_t(imax)]) imax = i;
    const Vec c = A.grid->position(A.grid->coords(imax));
    std::vector<double> rl = cfg.get_list("diagnose.r_list", {});
    if (rl.empty()) {
      double r = 4.0 * A.epsilon;
      while (r <= 0.25 && rl.size() < 8) {
        rl.push_back(r);
        r *= 1.5;
      }
      if (rl.empty()) rl.push_back(0.25);
    }
    json jr;
    jr["center"] = std::vector<double>(c.begin(), c.begin() + A.grid->dim);
    jr["r"] = rl;
    jr["ratios"] = density_ratios(V, p, c, rl);
    jr["cw"] = A.potential->cw();
    rep["density"] = jr;
  }
  man.stage("varifold");

  {
    auto fields = trig_test_fields(*A.grid);
    TensorField T = stress_tensor(u, p);
    double worst = 0;
    json rows = json::array();
    for (const auto& X : fields) {
      const double v = divergence_test(T, X, p);
      const double nrm = c1_norm(X);
      rows.push_back(v);
      worst = std::max(worst, std::abs(v) / (nrm * std::max(E, 1e-30)));
    }
    rep["stress"] = {{"values", rows}, {"worst_normalized", worst}};

    double fv_worst = 0;
    for (const auto& X : fields)
      fv_worst = std::max(fv_worst, std::abs(first_variation_aniso(V, X, p)) /
                                        (c1_norm(X) * std::max(mass, 1e-30)));
    rep["first_variation_aniso_worst"] = fv_worst;
  }
  man.stage("stress");

  {
    CFSplit cs = cf_split(u, p);
    double lmin = 1e300, lmax = -1e300, bad = 0;
    for (std::int64_t i = 0; i < A.grid->size(); ++i) {
      lmin = std::min(lmin, cs.lambda[i]);
      lmax = std::max(lmax, cs.lambda[i]);
      if (mr.discrepancy[i] >= 0) bad = std::max(bad, 1.0 - cs.lambda[i]);
    }
    rep["cf"] = {{"lambda_min", lmin},
                 {"lambda_max", lmax},
                 {"max_one_minus_lambda_on_positive_discrepancy", bad}};
  }

  if (A.delta > 0) {
    ScalarField one(*A.grid, 1.0);
    StabilityReport sr =
        stability_diagnostic(u, p, one, cfg.get_double("diagnose.tau", 1e-8 / A.epsilon));
    rep["stability"] = {{"lhs", sr.lhs}, {"rhs", sr.rhs}, {"ratio", sr.ratio}};
  }
  man.stage("stability");

  {
    auto wl = cfg.get_list("diagnose.winding", {0, 1});
    std::array<int, 3> winding{0, 0, 0};
    for (std::size_t a = 0; a < wl.size() && a < 3; ++a)
      winding[a] = int(wl[a]);
    SliceOptions so;
    so.samples_per_cell = cfg.get_int("diagnose.samples_per_cell", 4);
    so.tangential_max_fraction = cfg.get_double("diagnose.tangential_max_fraction", 0.1);
    SliceQuantization sq = slice_quantization(u, p, winding, so);
    json hist = json::object();
    for (const auto& [k, c] : sq.histogram) hist[std::to_string(k)] = c;
    int within = 0, cert = 0;
    for (const auto& rec : sq.lines)
      if (rec.certified) {
        ++cert;
        if (rec.residual <= 0.15) ++within;
      }
    rep["quantization"] = {{"modal_k", sq.modal_k},
                           {"certified_fraction", sq.certified_fraction},
                           {"within_015_fraction", cert > 0 ? double(within) / cert : 0.0},
                           {"histogram", hist}};

    std::string csv =
        "line,base0,base1,base2,q,q_normalized,nearest_k,residual,tangential_fraction,"
        "certified\n";
    for (std::size_t i = 0; i < sq.lines.size(); ++i) {
      const auto& r = sq.lines[i];
      csv += std::to_string(i) + "," + fmt(r.base[0]) + "," + fmt(r.base[1]) + "," +
             fmt(r.base[2]) + "," + fmt(r.q) + "," + fmt(r.q_normalized) + "," +
             std::to_string(r.nearest_k) + "," + fmt(r.residual) + "," +
             fmt(r.tangential_fraction) + "," + (r.certified ? "1" : "0") + "\n";
    }
    atomic_write_text(man.artifact("lines.csv"), csv);

    Vec dir{};
    for (int a = 0; a < A.grid->dim; ++a) dir[a] = winding[std::size_t(a)];
    TangentialEnergy te = tangential_energy(u, p, dir);
    rep["tangential"] = {{"tangential", te.tangential},
                         {"total", te.total},
                         {"fraction", te.fraction()}};
  }
  man.stage("slices");

  atomic_write_text(man.artifact("report.json"), rep.dump(2) + "\n");
  man.stage("report");
  const bool ok = rep["varifold"]["mass_bound_ok"].get<bool>();
  return ok ? 0 : 2;
}

int cmd_gamma_sweep(const Config& cfg, const std::string& outdir, Manifest& man) {
  auto A = assemble(cfg);
  const std::string shape = cfg.get_string("gamma.shape", "stripe");
  ShapeSpec S;
  if (shape == "stripe") {
    S = ShapeSpec::stripe(cfg.get_int("gamma.axis", A.grid->dim - 1),
                          cfg.get_double("gamma.center", 0.5),
                          cfg.get_double("gamma.width", 0.25));
  } else if (shape == "circle" || shape == "ball") {
    auto c = cfg.get_list("gamma.center", {0.5, 0.5, 0.5});
    Vec cc{};
    for (std::size_t a = 0; a < c.size() && a < 3; ++a) cc[a] = c[a];
    S = ShapeSpec::ball(cc, cfg.get_double("gamma.radius", 0.25));
  } else if (shape == "ellipse") {
    auto c = cfg.get_list("gamma.center", {0.5, 0.5});
    auto ax = cfg.get_list("gamma.semi_axes", {0.3, 0.2});
    S = ShapeSpec::ellipse({c[0], c.size() > 1 ? c[1] : 0.5, 0}, ax[0],
                           ax.size() > 1 ? ax[1] : ax[0]);
  } else {
    throw std::invalid_argument("unknown gamma.shape: " + shape);
  }
  std::vector<double> eps = cfg.get_list("gamma.eps_list", {1.0 / 16, 1.0 / 32, 1.0 / 64});
  man.stage("setup");
  GammaSweep sw = gamma_sweep(S, *A.grid, *A.potential, *A.integrand, eps,
                              cfg.get_double("gamma.gamma", 0.0));
  man.stage("sweep");

  std::string csv = "epsilon,gamma,energy,target,gap\n";
  for (const auto& r : sw.rows)
    csv += fmt(r.epsilon) + "," + fmt(r.gamma) + "," + fmt(r.energy) + "," +
           fmt(r.target) + "," + fmt(r.gap) + "\n";
  atomic_write_text(man.artifact("sweep.csv"), csv);

  json rep;
  rep["target"] = sw.rows.empty() ? 0.0 : sw.rows.front().target;
  rep["final_gap"] = sw.rows.empty() ? 0.0 : sw.rows.back().gap;
  rep["gaps_decreasing"] = sw.gaps_decreasing;
  atomic_write_text(man.artifact("report.json"), rep.dump(2) + "\n");
  man.stage("report");
  return sw.gaps_decreasing ? 0 : 2;
}

}  // namespace

int run_subcommand(const std::string& name, const Config& cfg,
                   const std::string& outdir) {
  cfg.validate(known_config_keys());
  fs::create_directories(outdir);
  Manifest man(outdir, name, cfg);
  int code = 0;
  if (name == "heteroclinic") {
    code = cmd_heteroclinic(cfg, outdir, man);
  } else if (name == "audit") {
    code = cmd_audit(cfg, outdir, man);
  } else if (name == "minimize") {
    code = cmd_minimize(cfg, outdir, man);
  } else if (name == "mountain-pass") {
    code = cmd_mountain_pass(cfg, outdir, man);
  } else if (name == "spectrum") {
    code = cmd_spectrum(cfg, outdir, man);
  } else if (name == "diagnose") {
    code = cmd_diagnose(cfg, outdir, man);
  } else if (name == "gamma-sweep") {
    code = cmd_gamma_sweep(cfg, outdir, man);
  } else {
    throw std::invalid_argument("unknown subcommand: " + name);
  }
  man.finish();
  return code;
}

}  // namespace anisoac
