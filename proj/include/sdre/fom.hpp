#pragma once

#include <functional>
#include <vector>

#include "sdre/models.hpp"
#include "sdre/riccati.hpp"

namespace sdre {

struct Trajectory {
  std::vector<double> times;
  Mat states;    // N_h x (steps+1)
  Mat controls;  // m x (steps+1), control at each recorded time
  std::vector<int> riccati_iters;
  double wall_time = 0.0;
};

struct SolveStats {
  long solves = 0;
  long lyapunov_solves = 0;
  double riccati_seconds = 0.0;
  double max_closed_loop_eig = -1e300;
  double wall_seconds = 0.0;
  double mean_iterations() const { return solves ? double(lyapunov_solves) / solves : 0.0; }
  void add(const RiccatiReport& r, double seconds);
  void merge(const SolveStats& o);
};

using SolveHook = std::function<void(int step, int param, const Vec& state, const RiccatiReport&)>;

struct SweepOptions {
  SolverKind solver = SolverKind::CNK;
  int threads = 1;
  SolveHook on_solve;
  Mat initial_guess;  // guess for the first parameter at t=0; null matrix when empty
  Mat initial_states;  // one column per parameter; replaces the problem's initial condition
};

struct FomResult {
  std::vector<Trajectory> traj;
  SolveStats stats;
};

int step_count(double T, double dt);

// Explicit midpoint on y' = f(y) - B K y with the gain K frozen over the step.
Vec fom_step(const QuadraticModel& model, const Vec& y, const Mat& P, double dt);
Vec fom_step_gain(const QuadraticModel& model, const Vec& y, const Mat& K, double dt);

FomResult fom_sweep(const QuadraticModel& model, const ParamGrid& grid, double T, double dt,
                    const NkConfig& cfg, const SweepOptions& opt = {});

struct ErrorSeries {
  std::vector<double> times;
  std::vector<double> E, Ec;
  double E_mean = 0.0, Ec_mean = 0.0;
};

ErrorSeries error_metrics(const std::vector<Trajectory>& reference,
                          const std::vector<Trajectory>& reduced, double grid_weight);

}  // namespace sdre
