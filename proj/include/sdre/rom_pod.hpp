#pragma once

#include <utility>
#include <vector>

#include "sdre/fom.hpp"

namespace sdre {

struct ReducedOperators {
  Mat A_r, T_r, B_r, Q_r, F_r;
  Mat Rinv_Brt;  // R^{-1} B_r^T
  Mat basis;
  int rank() const { return static_cast<int>(basis.cols()); }
};

struct SnapshotSet {
  Mat S;
  std::vector<std::pair<int, double>> provenance;  // (training parameter index, time)
};

// Columns quad(V_j, V_k) at position j*r + k.
Mat basis_pairs(const QuadraticModel& model, const Mat& V);

ReducedOperators reduce_operators(const QuadraticModel& model, const Mat& V);

// Reduced SDC: column j is A_r e_j + T_r(e_j (x) z).
Mat reduced_sdc(const ReducedOperators& ops, const Vec& z);
Vec kron_self(const Vec& z);

// Snapshots at `count` uniform times on [0,T] (endpoints included).
SnapshotSet collect_snapshots(const QuadraticModel& model, const ParamGrid& training, double T,
                              double dt, int count, const NkConfig& cfg,
                              const SweepOptions& opt = {}, SolveStats* stats = nullptr);

// Same selection from already computed trajectories.
SnapshotSet snapshots_from(const std::vector<Trajectory>& traj, int count);

Mat pod_basis(const SnapshotSet& snaps, double tol);
Mat pod_basis_rank(const SnapshotSet& snaps, int r);

struct RomResult {
  std::vector<Trajectory> traj;  // lifted to full order
  SolveStats stats;
  double online_seconds = 0.0;
  double offline_seconds = 0.0;
  int r1 = 0, r2 = 0;
  double max_orthogonality_drift = 0.0;
  int rank() const { return r1 + r2; }
};

RomResult pod_run(const QuadraticModel& model, const ReducedOperators& ops, const ParamGrid& test,
                  double T, double dt, const NkConfig& cfg, const SweepOptions& opt = {});

// [U0, U_new] with U_new the energy-truncated left singular vectors of (I - U0 U0^T) M.
// r2_override > 0 fixes the number of new columns instead.
Mat enrich_basis(const Mat& U0, const Mat& M, double tol, int r2_override = 0);

enum class Enrichment { None, P, K };
const char* to_string(Enrichment e);

// Riccati information for enrichment: s full-order solutions at t=0 for the
// first s parameters, flattened column-wise (P) or as transposed gains (K).
Mat enrichment_source(const QuadraticModel& model, const ParamGrid& grid, Enrichment kind, int s,
                      const NkConfig& cfg);

}  // namespace sdre
