#include "sdre/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <json.hpp>

#include "sdre/error.hpp"
#include "sdre/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sdre {

void to_json(json& j, Problem p) { j = to_string(p); }
void from_json(const json& j, Problem& p) { p = problem_from_string(j.get<std::string>()); }
void to_json(json& j, SolverKind k) { j = to_string(k); }
void from_json(const json& j, SolverKind& k) { k = solver_from_string(j.get<std::string>()); }
void to_json(json& j, Method m) { j = to_string(m); }
void from_json(const json& j, Method& m) { m = method_from_string(j.get<std::string>()); }

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Interval, lo, hi)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ParamBox, mu1, mu2)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GridCounts, n1, n2)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ErrorSeries, times, E, Ec, E_mean, Ec_mean)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(MethodResult, label, method, solver, r1, r2, errors,
                                   global_seconds, offline_seconds, online_seconds,
                                   mean_riccati_seconds, mean_iterations, solves, lyapunov_solves,
                                   max_closed_loop_eig, speedup_vs_fom, max_orthogonality_drift)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EigCheck, label, value, expected_sign)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GCurves, t, g1, g2, g3)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SensitivityReport, H_norm, perturb_radius, c, delta_mu_bound,
                                   delta_mu_linear, delta_t_bound, delta_t_exact_root,
                                   delta_t_linear, L_A, L_y0, L_onesided, time_extension_holds,
                                   closed_loop_eig_checks, informational_checks, g, lambda_curve)

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::vector<std::string> kConfigKeys{
    "experiment", "problem",    "methods",       "solvers",    "N_h",       "n_per_axis",
    "T",          "dt",         "energy_tol",    "r",          "r2",        "s",
    "param_box",  "test_grid",  "training_grid", "snapshots",  "tol_nk",    "threads",
    "output_dir", "use_cache"};

json config_json(const ExperimentConfig& c) {
  return json{{"experiment", c.experiment},
              {"problem", c.problem},
              {"methods", c.methods},
              {"solvers", c.solvers},
              {"N_h", c.N_h},
              {"n_per_axis", c.n_per_axis},
              {"T", c.T},
              {"dt", c.dt},
              {"energy_tol", c.energy_tol},
              {"r", c.r},
              {"r2", c.r2},
              {"s", c.s},
              {"param_box", c.param_box},
              {"test_grid", c.test_grid},
              {"training_grid", c.training_grid},
              {"snapshots", c.snapshots},
              {"tol_nk", c.tol_nk},
              {"threads", c.threads},
              {"output_dir", c.output_dir},
              {"use_cache", c.use_cache}};
}

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config.") + key + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("config.") + key + ": " + e.what());
  }
}

ExperimentConfig config_from(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "config: expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), it.key()) == kConfigKeys.end())
      throw Error(ErrorKind::Config, "config." + it.key() + ": unknown field");
  ExperimentConfig c;
  take(j, "problem", c.problem);
  c.param_box = default_box(c.problem);
  take(j, "experiment", c.experiment);
  take(j, "methods", c.methods);
  take(j, "solvers", c.solvers);
  take(j, "N_h", c.N_h);
  take(j, "n_per_axis", c.n_per_axis);
  take(j, "T", c.T);
  take(j, "dt", c.dt);
  take(j, "energy_tol", c.energy_tol);
  take(j, "r", c.r);
  take(j, "r2", c.r2);
  take(j, "s", c.s);
  take(j, "param_box", c.param_box);
  take(j, "test_grid", c.test_grid);
  take(j, "training_grid", c.training_grid);
  take(j, "snapshots", c.snapshots);
  take(j, "tol_nk", c.tol_nk);
  take(j, "threads", c.threads);
  take(j, "output_dir", c.output_dir);
  take(j, "use_cache", c.use_cache);
  return c;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string cache_key(const ExperimentConfig& c, SolverKind solver, const GridCounts& g,
                      const char* kind) {
  json j{{"kind", kind},
         {"problem", c.problem},
         {"size", c.problem == Problem::Burgers2d ? c.n_per_axis : c.N_h},
         {"T", c.T},
         {"dt", c.dt},
         {"box", c.param_box},
         {"grid", g},
         {"tol_nk", c.tol_nk},
         {"solver", solver}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return std::string(kind) + "_" + buf;
}

struct Reference {
  std::vector<Trajectory> traj;
  SolveStats stats;
};

Reference full_order(const QuadraticModel& model, const ExperimentConfig& c, SolverKind solver,
                     const GridCounts& g, const char* kind) {
  const ParamGrid grid = make_param_grid(c.param_box, g.n1, g.n2);
  Reference ref;
  std::string path;
  if (c.use_cache) {
    fs::create_directories(fs::path(c.output_dir) / "cache");
    path = (fs::path(c.output_dir) / "cache" / (cache_key(c, solver, g, kind) + ".bin")).string();
    if (fs::exists(path) && load_trajectories(path, ref.traj, ref.stats)) return ref;
  }
  NkConfig nk;
  nk.tol_nk = c.tol_nk;
  SweepOptions so;
  so.solver = solver;
  so.threads = c.threads;
  FomResult fom = fom_sweep(model, grid, c.T, c.dt, nk, so);
  ref.traj = std::move(fom.traj);
  ref.stats = fom.stats;
  if (c.use_cache) save_trajectories(path, ref.traj, ref.stats);
  return ref;
}

bool is_pod(Method m) { return m == Method::Pod || m == Method::PPod || m == Method::KPod; }

Enrichment enrichment_of(Method m) {
  switch (m) {
    case Method::PPod:
    case Method::PDlra: return Enrichment::P;
    case Method::KPod:
    case Method::KDlra: return Enrichment::K;
    default: return Enrichment::None;
  }
}

void fill_stats(MethodResult& r, const SolveStats& s) {
  r.solves = s.solves;
  r.lyapunov_solves = s.lyapunov_solves;
  r.mean_iterations = s.mean_iterations();
  r.mean_riccati_seconds = s.solves ? s.riccati_seconds / s.solves : 0.0;
  r.max_closed_loop_eig = s.max_closed_loop_eig;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + p.string());
  os << text;
  if (!os) throw Error(ErrorKind::Io, "write failed: " + p.string());
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::Fom: return "fom";
    case Method::Pod: return "pod";
    case Method::PPod: return "p_pod";
    case Method::KPod: return "k_pod";
    case Method::Dlra: return "dlra";
    case Method::PDlra: return "p_dlra";
    case Method::KDlra: return "k_dlra";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  for (Method m : {Method::Fom, Method::Pod, Method::PPod, Method::KPod, Method::Dlra,
                   Method::PDlra, Method::KDlra})
    if (s == to_string(m)) return m;
  throw Error(ErrorKind::Config, "unknown method '" + s + "'");
}

bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }
bool operator==(const ParamBox& a, const ParamBox& b) { return a.mu1 == b.mu1 && a.mu2 == b.mu2; }

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return config_json(a) == config_json(b);
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw Error(ErrorKind::Config, "config." + field + ": " + msg);
  };
  if (methods.empty()) fail("methods", "empty");
  if (solvers.empty()) fail("solvers", "empty");
  if (N_h < 2) fail("N_h", "must be >= 2");
  if (n_per_axis < 2) fail("n_per_axis", "must be >= 2");
  if (!(T > 0.0)) fail("T", "must be > 0");
  if (!(dt > 0.0) || dt > T) fail("dt", "must satisfy 0 < dt <= T");
  if (!(energy_tol > 0.0 && energy_tol < 1.0)) fail("energy_tol", "must lie in (0,1)");
  if (r < 0) fail("r", "must be >= 0");
  if (r2 < 0) fail("r2", "must be >= 0");
  if (s < 1) fail("s", "must be >= 1");
  if (test_grid.n1 < 1 || test_grid.n2 < 1) fail("test_grid", "counts must be >= 1");
  if (training_grid.n1 < 1 || training_grid.n2 < 1) fail("training_grid", "counts must be >= 1");
  if (snapshots < 1) fail("snapshots", "must be >= 1");
  if (!(tol_nk > 0.0)) fail("tol_nk", "must be > 0");
  if (threads < 1) fail("threads", "must be >= 1");
  if (param_box.mu1.lo > param_box.mu1.hi || param_box.mu2.lo > param_box.mu2.hi)
    fail("param_box", "lo > hi");
  if (s > test_grid.n1 * test_grid.n2) fail("s", "exceeds the test grid size");
  try {
    step_count(T, dt);
  } catch (const Error& e) {
    fail("dt", e.what());
  }
}

Scale scale_from_string(const std::string& s) {
  if (s == "paper") return Scale::Paper;
  if (s == "desk") return Scale::Desk;
  throw Error(ErrorKind::Config, "unknown scale '" + s + "'");
}

ExperimentConfig preset(const std::string& experiment, Scale scale) {
  ExperimentConfig c;
  c.experiment = experiment;
  const bool desk = scale == Scale::Desk;
  const std::vector<Method> all{Method::Dlra, Method::KDlra, Method::PDlra,
                                Method::Pod,  Method::KPod,  Method::PPod};
  if (experiment == "1") {
    c.problem = Problem::Burgers1d;
    c.methods = {Method::Fom, Method::Dlra, Method::Pod};
    c.solvers = {SolverKind::NK, SolverKind::CNK, SolverKind::Oracle};
    c.test_grid = desk ? GridCounts{5, 5} : GridCounts{20, 20};
    c.training_grid = desk ? GridCounts{3, 3} : GridCounts{4, 4};
    c.r = desk ? 4 : 0;
  } else if (experiment == "2") {
    c.problem = Problem::Burgers1d;
    c.methods = all;
    c.test_grid = desk ? GridCounts{5, 5} : GridCounts{20, 20};
    c.training_grid = desk ? GridCounts{3, 3} : GridCounts{4, 4};
    c.r = desk ? 4 : 0;
  } else if (experiment == "3") {
    c.problem = Problem::Burgers2d;
    c.methods = all;
    c.n_per_axis = desk ? 10 : 20;
    c.T = 0.5;
    c.test_grid = desk ? GridCounts{5, 5} : GridCounts{10, 10};
    c.training_grid = desk ? GridCounts{3, 3} : GridCounts{4, 4};
  } else if (experiment == "appendix") {
    c.problem = Problem::ReactionDiffusion;
    c.methods = {Method::Fom};
    c.N_h = 50;
    c.T = 0.1;
  } else {
    throw Error(ErrorKind::Config, "unknown experiment '" + experiment + "'");
  }
  c.param_box = default_box(c.problem);
  return c;
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config: ") + e.what());
  }
  return config_from(j);
}

std::string report_to_json(const RunReport& report) {
  json j{{"config", config_json(report.config)}, {"results", report.results}};
  j["sensitivity"] = report.sensitivity ? json(*report.sensitivity) : json(nullptr);
  return j.dump(2);
}

RunReport report_from_json(const std::string& text) {
  RunReport r;
  try {
    const json j = json::parse(text);
    r.config = config_from(j.at("config"));
    r.results = j.at("results").get<std::vector<MethodResult>>();
    if (!j.at("sensitivity").is_null()) r.sensitivity = j.at("sensitivity").get<SensitivityReport>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, std::string("report: ") + e.what());
  }
  return r;
}

QuadraticModel build_model(const ExperimentConfig& cfg) {
  switch (cfg.problem) {
    case Problem::Burgers1d: {
      Burgers1dOptions o;
      o.N_h = cfg.N_h;
      return build_burgers1d(o);
    }
    case Problem::Burgers2d: {
      Burgers2dOptions o;
      o.n_per_axis = cfg.n_per_axis;
      return build_burgers2d(o);
    }
    case Problem::ReactionDiffusion: {
      ReactionDiffusionOptions o;
      o.N_h = cfg.N_h;
      return build_reaction_diffusion(o);
    }
  }
  throw Error(ErrorKind::Config, "unknown problem");
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunReport report;
  report.config = cfg;

  if (cfg.problem == Problem::ReactionDiffusion) {
    AppendixConfig ac;
    ac.N_h = cfg.N_h;
    ac.T = cfg.T;
    ac.dt = cfg.dt;
    report.sensitivity = appendix_validate(ac);
    return report;
  }

  const QuadraticModel model = build_model(cfg);
  const ParamGrid test = make_param_grid(cfg.param_box, cfg.test_grid.n1, cfg.test_grid.n2);
  const ParamGrid training =
      make_param_grid(cfg.param_box, cfg.training_grid.n1, cfg.training_grid.n2);
  const int r_base =
      cfg.r > 0 ? cfg.r : svd_truncate(initial_ensemble(model, test), cfg.energy_tol).retained_rank;
  NkConfig nk;
  nk.tol_nk = cfg.tol_nk;
  const bool tagged = cfg.solvers.size() > 1;

  for (SolverKind solver : cfg.solvers) {
    const Reference ref = full_order(model, cfg, solver, cfg.test_grid, "fom");
    std::optional<Reference> train;
    for (Method method : cfg.methods) {
      MethodResult res;
      res.method = method;
      res.solver = solver;
      res.label = std::string(to_string(method)) + (tagged ? std::string("_") + to_string(solver) : "");
      std::vector<Trajectory> traj;
      SweepOptions so;
      so.solver = solver;
      so.threads = cfg.threads;
      if (method == Method::Fom) {
        traj = ref.traj;
        res.r1 = static_cast<int>(model.n());
        res.global_seconds = res.online_seconds = ref.stats.wall_seconds;
        fill_stats(res, ref.stats);
      } else if (is_pod(method)) {
        const auto t0 = Clock::now();
        if (!train) train = full_order(model, cfg, solver, cfg.training_grid, "train");
        const SnapshotSet snaps = snapshots_from(train->traj, cfg.snapshots);
        Mat V = pod_basis_rank(snaps, r_base);
        const Enrichment en = enrichment_of(method);
        if (en != Enrichment::None)
          V = enrich_basis(V, enrichment_source(model, training, en, cfg.s, nk), cfg.energy_tol,
                           cfg.r2);
        const ReducedOperators ops = reduce_operators(model, V);
        res.offline_seconds = seconds_since(t0) + train->stats.wall_seconds;
        RomResult rom = pod_run(model, ops, test, cfg.T, cfg.dt, nk, so);
        res.r1 = r_base;
        res.r2 = ops.rank() - r_base;
        res.online_seconds = rom.online_seconds;
        res.global_seconds = res.offline_seconds + res.online_seconds;
        fill_stats(res, rom.stats);
        traj = std::move(rom.traj);
      } else {
        DlraOptions o;
        o.tol = cfg.energy_tol;
        o.rank = r_base;
        o.enrich = enrichment_of(method);
        o.r2 = cfg.r2;
        o.s = cfg.s;
        o.solver = solver;
        RomResult rom = dlra_run(model, test, cfg.T, cfg.dt, o, nk);
        res.r1 = rom.r1;
        res.r2 = rom.r2;
        res.online_seconds = rom.online_seconds;
        res.global_seconds = rom.online_seconds;
        res.max_orthogonality_drift = rom.max_orthogonality_drift;
        fill_stats(res, rom.stats);
        traj = std::move(rom.traj);
      }
      res.errors = error_metrics(ref.traj, traj, model.grid.weight);
      res.speedup_vs_fom = res.global_seconds > 0.0 ? ref.stats.wall_seconds / res.global_seconds : 0.0;
      for (double e : res.errors.E)
        if (!std::isfinite(e))
          throw Error(ErrorKind::NonFinite, "stage=metrics method=" + res.label);
      report.results.push_back(std::move(res));
    }
  }
  return report;
}

void emit_report(const RunReport& report, const std::string& dir) {
  const fs::path d(dir);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir + ": " + ec.message());
  write_text(d / "report.json", report_to_json(report) + "\n");

  std::string csv = "t";
  const auto& rs = report.results;
  if (rs.size() <= 1) {
    csv += ",E,E_c\n";
  } else {
    for (const auto& r : rs) csv += ",E_" + r.label;
    for (const auto& r : rs) csv += ",E_c_" + r.label;
    csv += "\n";
  }
  if (!rs.empty()) {
    const auto& times = rs[0].errors.times;
    for (std::size_t i = 0; i < times.size(); ++i) {
      csv += num(times[i]);
      for (const auto& r : rs) csv += "," + num(r.errors.E.at(i));
      for (const auto& r : rs) csv += "," + num(r.errors.Ec.at(i));
      csv += "\n";
    }
  }
  write_text(d / "errors.csv", csv);

  std::string tm =
      "label,method,solver,r1,r2,global_s,offline_s,online_s,mean_riccati_s,mean_iterations,"
      "solves,lyapunov_solves,speedup_vs_fom,E_mean,E_c_mean\n";
  for (const auto& r : rs) {
    tm += r.label + "," + to_string(r.method) + "," + to_string(r.solver) + "," +
          std::to_string(r.r1) + "," + std::to_string(r.r2) + "," + num(r.global_seconds) + "," +
          num(r.offline_seconds) + "," + num(r.online_seconds) + "," +
          num(r.mean_riccati_seconds) + "," + num(r.mean_iterations) + "," +
          std::to_string(r.solves) + "," + std::to_string(r.lyapunov_solves) + "," +
          num(r.speedup_vs_fom) + "," + num(r.errors.E_mean) + "," + num(r.errors.Ec_mean) + "\n";
  }
  write_text(d / "timings.csv", tm);

  if (report.sensitivity) {
    const GCurves& g = report.sensitivity->g;
    std::string gc = "t,g1,g2,g3\n";
    for (std::size_t i = 0; i < g.t.size(); ++i)
      gc += num(g.t[i]) + "," + num(g.g1[i]) + "," + num(g.g2[i]) + "," + num(g.g3[i]) + "\n";
    write_text(d / "gcurves.csv", gc);
  }
}

}  // namespace sdre
