#include "sdre/fom.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "sdre/parallel.hpp"

namespace sdre {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string where(int step, double dt, const Param& mu) {
  return "t=" + std::to_string(step * dt) + " mu=(" + std::to_string(mu[0]) + "," +
         std::to_string(mu[1]) + ")";
}

}  // namespace

void SolveStats::add(const RiccatiReport& r, double seconds) {
  ++solves;
  lyapunov_solves += r.iterations;
  riccati_seconds += seconds;
  max_closed_loop_eig = std::max(max_closed_loop_eig, r.closed_loop_max_real_eig);
}

void SolveStats::merge(const SolveStats& o) {
  solves += o.solves;
  lyapunov_solves += o.lyapunov_solves;
  riccati_seconds += o.riccati_seconds;
  max_closed_loop_eig = std::max(max_closed_loop_eig, o.max_closed_loop_eig);
  wall_seconds += o.wall_seconds;
}

int step_count(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0) || dt > T * (1 + 1e-12))
    throw Error(ErrorKind::Config, "need T > 0 and 0 < dt <= T");
  const double steps = T / dt;
  const long n = std::lround(steps);
  if (std::abs(steps - n) > 1e-8 * steps)
    throw Error(ErrorKind::Config, "T must be an integer multiple of dt");
  return static_cast<int>(n);
}

Vec fom_step_gain(const QuadraticModel& model, const Vec& y, const Mat& K, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Config, "fom_step: dt must be positive");
  auto g = [&](const Vec& z) -> Vec { return model.rhs(z) - model.B * (K * z); };
  const Vec yh = y + 0.5 * dt * g(y);
  Vec out = y + dt * g(yh);
  if (!out.allFinite()) throw Error(ErrorKind::NonFinite, "fom_step: state blew up");
  return out;
}

Vec fom_step(const QuadraticModel& model, const Vec& y, const Mat& P, double dt) {
  return fom_step_gain(model, y, model.Rinv_Bt * P, dt);
}

FomResult fom_sweep(const QuadraticModel& model, const ParamGrid& grid, double T, double dt,
                    const NkConfig& cfg, const SweepOptions& opt) {
  const int steps = step_count(T, dt);
  const int p = static_cast<int>(grid.size());
  if (p == 0) throw Error(ErrorKind::Config, "fom_sweep: empty parameter grid");
  if (opt.initial_states.size() &&
      (opt.initial_states.rows() != model.n() || opt.initial_states.cols() != p))
    throw Error(ErrorKind::DimensionMismatch, "fom_sweep: initial_states shape");
  const Eigen::Index n = model.n(), m = model.m();
  const auto t_start = Clock::now();

  FomResult out;
  out.traj.resize(p);
  std::vector<Vec> y(p);
  for (int j = 0; j < p; ++j) {
    Trajectory& tr = out.traj[j];
    tr.states.resize(n, steps + 1);
    tr.controls.resize(m, steps + 1);
    tr.times.resize(steps + 1);
    for (int i = 0; i <= steps; ++i) tr.times[i] = i * dt;
    y[j] = opt.initial_states.size() ? Vec(opt.initial_states.col(j))
                                     : initial_state(model.problem, grid.values[j], model.grid);
    tr.states.col(0) = y[j];
  }

  Mat time_guess = opt.initial_guess.size() ? opt.initial_guess : Mat::Zero(n, n);
  std::vector<Mat> K(p);
  for (int i = 0; i <= steps; ++i) {
    Mat guess = time_guess;
    for (int j = 0; j < p; ++j) {
      const auto t0 = Clock::now();
      RiccatiReport rep;
      try {
        rep = solve_sdre(opt.solver, sdc_matrix(model, y[j]), model.F, model.Q, guess, cfg);
      } catch (const Error& e) {
        throw Error(e.kind(), where(i, dt, grid.values[j]) + " stage=fom: " + e.what());
      }
      out.stats.add(rep, seconds_since(t0));
      if (opt.on_solve) opt.on_solve(i, j, y[j], rep);
      out.traj[j].riccati_iters.push_back(rep.iterations);
      K[j] = model.Rinv_Bt * rep.P;
      out.traj[j].controls.col(i) = -K[j] * y[j];
      if (j == 0) time_guess = rep.P;
      guess = std::move(rep.P);
    }
    if (i == steps) break;
    parallel_for(p, opt.threads, [&](int j) {
      try {
        y[j] = fom_step_gain(model, y[j], K[j], dt);
      } catch (const Error& e) {
        throw Error(e.kind(), where(i, dt, grid.values[j]) + " stage=fom_step: " + e.what());
      }
      out.traj[j].states.col(i + 1) = y[j];
    });
  }
  out.stats.wall_seconds = seconds_since(t_start);
  for (auto& tr : out.traj) tr.wall_time = out.stats.wall_seconds;
  return out;
}

ErrorSeries error_metrics(const std::vector<Trajectory>& reference,
                          const std::vector<Trajectory>& reduced, double grid_weight) {
  if (reference.size() != reduced.size() || reference.empty())
    throw Error(ErrorKind::GridMismatch, "error_metrics: parameter sets differ");
  const std::size_t nt = reference[0].times.size();
  for (std::size_t j = 0; j < reference.size(); ++j) {
    const Trajectory &a = reference[j], &b = reduced[j];
    if (a.times.size() != nt || b.times.size() != nt || a.states.rows() != b.states.rows() ||
        a.controls.rows() != b.controls.rows() || a.states.cols() != b.states.cols())
      throw Error(ErrorKind::GridMismatch, "error_metrics: trajectory shapes differ");
    for (std::size_t i = 0; i < nt; ++i)
      if (std::abs(a.times[i] - b.times[i]) > 1e-12)
        throw Error(ErrorKind::GridMismatch, "error_metrics: time grids differ");
  }
  ErrorSeries es;
  es.times = reference[0].times;
  es.E.assign(nt, 0.0);
  es.Ec.assign(nt, 0.0);
  const double w = std::sqrt(grid_weight);
  const double p = static_cast<double>(reference.size());
  for (std::size_t j = 0; j < reference.size(); ++j) {
    const Mat dy = reference[j].states - reduced[j].states;
    const Mat du = reference[j].controls - reduced[j].controls;
    for (std::size_t i = 0; i < nt; ++i) {
      es.E[i] += w * dy.col(i).norm() / p;
      es.Ec[i] += w * du.col(i).norm() / p;
    }
  }
  for (std::size_t i = 0; i < nt; ++i) {
    es.E_mean += es.E[i] / nt;
    es.Ec_mean += es.Ec[i] / nt;
  }
  return es;
}

}  // namespace sdre
