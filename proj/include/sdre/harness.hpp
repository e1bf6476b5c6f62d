#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sdre/rom_dlra.hpp"
#include "sdre/sensitivity.hpp"

namespace sdre {

enum class Method { Fom, Pod, PPod, KPod, Dlra, PDlra, KDlra };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct GridCounts {
  int n1 = 5, n2 = 5;
  bool operator==(const GridCounts&) const = default;
};

struct ExperimentConfig {
  std::string experiment = "custom";
  Problem problem = Problem::Burgers1d;
  std::vector<Method> methods{Method::Dlra};
  std::vector<SolverKind> solvers{SolverKind::CNK};
  int N_h = 100;         // 1D node count
  int n_per_axis = 10;   // 2D nodes per axis
  double T = 1.0;
  double dt = 1e-3;
  double energy_tol = 0.9999;
  int r = 0;             // > 0 overrides the energy criterion for the base rank
  int r2 = 0;            // > 0 fixes the enrichment rank
  int s = 1;             // Riccati solutions used for enrichment
  ParamBox param_box = default_box(Problem::Burgers1d);
  GridCounts test_grid{5, 5};
  GridCounts training_grid{3, 3};
  int snapshots = 100;   // per training parameter
  double tol_nk = 1e-8;
  int threads = 1;
  std::string output_dir = "out";
  bool use_cache = true;

  void validate() const;
};

bool operator==(const Interval& a, const Interval& b);
bool operator==(const ParamBox& a, const ParamBox& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

enum class Scale { Paper, Desk };
Scale scale_from_string(const std::string& s);

// Experiment presets: "1", "2", "3" or "appendix".
ExperimentConfig preset(const std::string& experiment, Scale scale);

struct MethodResult {
  std::string label;
  Method method = Method::Fom;
  SolverKind solver = SolverKind::CNK;
  int r1 = 0, r2 = 0;
  ErrorSeries errors;
  double global_seconds = 0.0;
  double offline_seconds = 0.0;
  double online_seconds = 0.0;
  double mean_riccati_seconds = 0.0;
  double mean_iterations = 0.0;
  long solves = 0;
  long lyapunov_solves = 0;
  double max_closed_loop_eig = 0.0;
  double speedup_vs_fom = 0.0;  // machine-relative
  double max_orthogonality_drift = 0.0;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<MethodResult> results;
  std::optional<SensitivityReport> sensitivity;
};

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);

QuadraticModel build_model(const ExperimentConfig& cfg);

RunReport run_experiment(const ExperimentConfig& cfg);

// Writes report.json, errors.csv, timings.csv and, for the appendix, gcurves.csv.
void emit_report(const RunReport& report, const std::string& dir);

}  // namespace sdre
