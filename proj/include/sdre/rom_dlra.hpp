#pragma once

#include <functional>
#include <vector>

#include "sdre/rom_pod.hpp"

namespace sdre {

struct LowRankState {
  Mat U;     // N_h x r, orthonormal columns
  Mat Ztil;  // r x p
  int rank() const { return static_cast<int>(U.cols()); }
  Mat reconstruct() const { return U * Ztil; }
};

struct DlraGramian {
  Mat C;
  double regularization = 0.0;
};

struct DlraRhs {
  Mat F_U, F_Z;
  DlraGramian gramian;
};

LowRankState dlra_init(const Mat& Y0, double tol);
LowRankState dlra_init_rank(const Mat& Y0, int r);

// Factor right-hand sides; P_list holds one r x r reduced Riccati solution per column.
DlraRhs dlra_rhs(const LowRankState& state, const QuadraticModel& model,
                 const std::vector<Mat>& P_list);

// Midpoint step with QR retraction after each basis update; P_list is frozen.
LowRankState stiefel_step(const LowRankState& state, const QuadraticModel& model,
                          const std::vector<Mat>& P_list, double dt);

// Solves the reduced SDREs by cascade from the null guess, then steps.
LowRankState stiefel_step(const LowRankState& state, const QuadraticModel& model, double dt,
                          const NkConfig& cfg);

struct DlraOptions {
  double tol = 0.9999;
  int rank = 0;  // > 0 overrides the energy criterion for r1
  Enrichment enrich = Enrichment::None;
  int r2 = 0;  // > 0 fixes the enrichment rank
  int s = 1;
  SolverKind solver = SolverKind::CNK;
  SolveHook on_solve;
  std::function<void(int step, const LowRankState&)> on_step;
};

RomResult dlra_run(const QuadraticModel& model, const ParamGrid& grid, double T, double dt,
                   const DlraOptions& opt, const NkConfig& cfg);

}  // namespace sdre
