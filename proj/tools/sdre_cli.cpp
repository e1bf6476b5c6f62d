#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sdre/error.hpp"
#include "sdre/harness.hpp"

using namespace sdre;

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void print_summary(const RunReport& rep) {
  if (rep.sensitivity) {
    const auto& s = *rep.sensitivity;
    std::printf("H_norm      %.6g\n", s.H_norm);
    std::printf("c           %.6g\n", s.c);
    std::printf("dmu*        %.6g\n", s.delta_mu_bound);
    std::printf("dt* printed %.6g  exact root %.6g\n", s.delta_t_bound, s.delta_t_exact_root);
    std::printf("L_A %.6g  L_y0 %.6g  L %.6g\n", s.L_A, s.L_y0, s.L_onesided);
    for (const auto& c : s.closed_loop_eig_checks)
      std::printf("  %-12s lambda_max %+.4f expected %s %s\n", c.label.c_str(), c.value,
                  c.expected_sign > 0 ? "+" : "-", c.sign_ok() ? "ok" : "MISMATCH");
    for (const auto& c : s.informational_checks)
      std::printf("  %-12s lambda_max %+.4f (info)\n", c.label.c_str(), c.value);
    return;
  }
  std::printf("%-18s %4s %4s %12s %12s %10s %10s %12s\n", "method", "r1", "r2", "mean E",
              "mean E_c", "global s", "iters", "speedup*");
  for (const auto& r : rep.results)
    std::printf("%-18s %4d %4d %12.4e %12.4e %10.3f %10.3f %12.3f\n", r.label.c_str(), r.r1, r.r2,
                r.errors.E_mean, r.errors.Ec_mean, r.global_seconds, r.mean_iterations,
                r.speedup_vs_fom);
  std::printf("* machine-relative\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SDRE feedback control with full-order and reduced-order engines"};
  std::string config_path, experiment, methods, solvers, out, scale = "desk";
  int threads = 0;
  bool print_config = false;
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--experiment", experiment, "Preset experiment")
      ->check(CLI::IsMember({"1", "2", "3", "appendix"}));
  app.add_option("--method", methods, "Comma-separated methods (fom,pod,p_pod,k_pod,dlra,p_dlra,k_dlra)");
  app.add_option("--solver", solvers, "Comma-separated solvers (nk,cnk,oracle)");
  app.add_option("--out", out, "Output directory (default: $SDRE_OUT_DIR or out)");
  app.add_option("--threads", threads, "Thread budget")->check(CLI::PositiveNumber);
  app.add_option("--scale", scale, "Preset scale")->check(CLI::IsMember({"paper", "desk"}));
  app.add_flag("--print-config", print_config, "Print the resolved config and exit");
  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg;
    if (!experiment.empty()) cfg = preset(experiment, scale_from_string(scale));
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw Error(ErrorKind::Io, "cannot open " + config_path);
      std::stringstream buf;
      buf << is.rdbuf();
      cfg = config_from_json(buf.str());
    }
    if (!methods.empty()) {
      cfg.methods.clear();
      for (const auto& m : split(methods)) cfg.methods.push_back(method_from_string(m));
    }
    if (!solvers.empty()) {
      cfg.solvers.clear();
      for (const auto& s : split(solvers)) cfg.solvers.push_back(solver_from_string(s));
    }
    if (threads > 0) cfg.threads = threads;
    if (!out.empty())
      cfg.output_dir = out;
    else if (const char* env = std::getenv("SDRE_OUT_DIR"))
      cfg.output_dir = env;
    cfg.validate();
    if (print_config) {
      std::cout << config_to_json(cfg) << "\n";
      return 0;
    }
    const RunReport rep = run_experiment(cfg);
    emit_report(rep, cfg.output_dir);
    print_summary(rep);
    std::printf("artifacts written to %s\n", cfg.output_dir.c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
