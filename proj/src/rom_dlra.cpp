#include "sdre/rom_dlra.hpp"

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

double drift(const Mat& U) {
  return (U.transpose() * U - Mat::Identity(U.cols(), U.cols())).norm();
}

DlraRhs rhs_with_ops(const LowRankState& st, const QuadraticModel& model,
                     const std::vector<Mat>& P_list, const ReducedOperators& ops,
                     const Mat& pairs) {
  const Mat& U = st.U;
  const Mat& Z = st.Ztil;
  const Eigen::Index r = U.cols(), p = Z.cols();
  if (static_cast<Eigen::Index>(P_list.size()) != p)
    throw Error(ErrorKind::DimensionMismatch, "dlra_rhs: one Riccati solution per column");

  DlraRhs out;
  Mat C = Z * Z.transpose();
  const double eps = 1e-12 * std::max(C.trace(), 1.0);
  C.diagonal().array() += eps;
  out.gramian.C = C;
  out.gramian.regularization = eps;
  Eigen::LLT<Mat> llt(C);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::SingularGramian, "dlra_rhs: Gramian is not positive definite");

  Mat PZ(r, p), Vx(r * r, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    PZ.col(j) = P_list[j] * Z.col(j);
    Vx.col(j) = kron_self(Z.col(j));
  }
  // V = Vx Z^T C^{-1}, S = B R^{-1} B_r^T PZ Z^T
  const Mat V = llt.solve(Z * Vx.transpose()).transpose();
  const Mat S = model.B * (ops.Rinv_Brt * (PZ * Z.transpose()));
  const Mat SCi = llt.solve(S.transpose()).transpose();
  Mat G = model.A * U + pairs * V - SCi;
  out.F_U = G - U * (U.transpose() * G);
  out.F_Z = ops.A_r * Z + ops.T_r * Vx - ops.F_r * PZ;
  return out;
}

struct StepOps {
  ReducedOperators ops;
  Mat pairs;
};

StepOps step_ops(const QuadraticModel& model, const Mat& U) {
  StepOps s;
  s.pairs = basis_pairs(model, U);
  s.ops.basis = U;
  s.ops.A_r = U.transpose() * model.A * U;
  s.ops.T_r = U.transpose() * s.pairs;
  s.ops.B_r = U.transpose() * model.B;
  s.ops.Q_r = U.transpose() * model.Q * U;
  s.ops.Q_r = 0.5 * (s.ops.Q_r + s.ops.Q_r.transpose()).eval();
  s.ops.Rinv_Brt = model.Rinv_Bt * U;
  s.ops.F_r = s.ops.B_r * s.ops.Rinv_Brt;
  s.ops.F_r = 0.5 * (s.ops.F_r + s.ops.F_r.transpose()).eval();
  return s;
}

LowRankState advance(const LowRankState& base, const DlraRhs& f, double tau) {
  auto [Q, R] = qr_retract(base.U + tau * f.F_U);
  LowRankState out;
  out.U = std::move(Q);
  out.Ztil = R * (base.Ztil + tau * f.F_Z);
  return out;
}

LowRankState midpoint(const LowRankState& st, const QuadraticModel& model,
                      const std::vector<Mat>& P_list, const StepOps& first, double dt) {
  const DlraRhs k1 = rhs_with_ops(st, model, P_list, first.ops, first.pairs);
  const LowRankState half = advance(st, k1, 0.5 * dt);
  const StepOps mid = step_ops(model, half.U);
  const DlraRhs k2 = rhs_with_ops(half, model, P_list, mid.ops, mid.pairs);
  LowRankState out = advance(st, k2, dt);
  if (!out.Ztil.allFinite()) throw Error(ErrorKind::NonFinite, "stiefel_step: coefficients blew up");
  return out;
}

}  // namespace

LowRankState dlra_init(const Mat& Y0, double tol) {
  LowRankState st;
  st.U = svd_truncate(Y0, tol).basis;
  st.Ztil = st.U.transpose() * Y0;
  return st;
}

LowRankState dlra_init_rank(const Mat& Y0, int r) {
  if (Y0.size() == 0 || Y0.norm() == 0.0) throw Error(ErrorKind::ZeroMatrix, "dlra_init");
  if (r < 1 || r > std::min(Y0.rows(), Y0.cols()))
    throw Error(ErrorKind::Config, "dlra_init: rank out of range");
  Eigen::BDCSVD<Mat> svd(Y0, Eigen::ComputeThinU);
  LowRankState st;
  st.U = svd.matrixU().leftCols(r);
  st.Ztil = st.U.transpose() * Y0;
  return st;
}

DlraRhs dlra_rhs(const LowRankState& state, const QuadraticModel& model,
                 const std::vector<Mat>& P_list) {
  const StepOps s = step_ops(model, state.U);
  return rhs_with_ops(state, model, P_list, s.ops, s.pairs);
}

LowRankState stiefel_step(const LowRankState& state, const QuadraticModel& model,
                          const std::vector<Mat>& P_list, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Config, "stiefel_step: dt must be positive");
  return midpoint(state, model, P_list, step_ops(model, state.U), dt);
}

LowRankState stiefel_step(const LowRankState& state, const QuadraticModel& model, double dt,
                          const NkConfig& cfg) {
  const StepOps s = step_ops(model, state.U);
  const Eigen::Index r = state.U.cols();
  std::vector<Mat> Ps;
  Mat guess = Mat::Zero(r, r);
  for (Eigen::Index j = 0; j < state.Ztil.cols(); ++j) {
    RiccatiReport rep =
        nk_solve(reduced_sdc(s.ops, state.Ztil.col(j)), s.ops.F_r, s.ops.Q_r, guess, cfg);
    guess = rep.P;
    Ps.push_back(std::move(rep.P));
  }
  return midpoint(state, model, Ps, s, dt);
}

RomResult dlra_run(const QuadraticModel& model, const ParamGrid& grid, double T, double dt,
                   const DlraOptions& opt, const NkConfig& cfg) {
  const int steps = step_count(T, dt);
  const int p = static_cast<int>(grid.size());
  const auto t_start = Clock::now();
  RomResult out;

  const Mat Y0 = initial_ensemble(model, grid);
  LowRankState st = opt.rank > 0 ? dlra_init_rank(Y0, opt.rank) : dlra_init(Y0, opt.tol);
  out.r1 = st.rank();
  if (opt.enrich != Enrichment::None) {
    const Mat M = enrichment_source(model, grid, opt.enrich, opt.s, cfg);
    st.U = enrich_basis(st.U, M, opt.tol, opt.r2);
    st.Ztil = st.U.transpose() * Y0;
  }
  out.r2 = st.rank() - out.r1;
  const Eigen::Index r = st.rank();

  out.traj.resize(p);
  for (int j = 0; j < p; ++j) {
    Trajectory& tr = out.traj[j];
    tr.states.resize(model.n(), steps + 1);
    tr.controls.resize(model.m(), steps + 1);
    tr.times.resize(steps + 1);
    for (int i = 0; i <= steps; ++i) tr.times[i] = i * dt;
  }

  Mat time_guess = Mat::Zero(r, r);
  std::vector<Mat> Ps(p);
  for (int i = 0; i <= steps; ++i) {
    if (opt.on_step) opt.on_step(i, st);
    const Mat Y = st.reconstruct();
    const StepOps s = step_ops(model, st.U);
    Mat guess = time_guess;
    for (int j = 0; j < p; ++j) {
      const Vec z = st.Ztil.col(j);
      const auto t0 = Clock::now();
      RiccatiReport rep;
      try {
        rep = solve_sdre(opt.solver, reduced_sdc(s.ops, z), s.ops.F_r, s.ops.Q_r, guess, cfg);
      } catch (const Error& e) {
        throw Error(e.kind(), "t=" + std::to_string(i * dt) + " param=" + std::to_string(j) +
                                  " stage=dlra: " + e.what());
      }
      out.stats.add(rep, seconds_since(t0));
      if (opt.on_solve) opt.on_solve(i, j, z, rep);
      Trajectory& tr = out.traj[j];
      tr.riccati_iters.push_back(rep.iterations);
      tr.states.col(i) = Y.col(j);
      tr.controls.col(i) = -(s.ops.Rinv_Brt * (rep.P * z));
      if (j == 0) time_guess = rep.P;
      guess = rep.P;
      Ps[j] = std::move(rep.P);
    }
    if (i == steps) break;
    try {
      st = midpoint(st, model, Ps, s, dt);
    } catch (const Error& e) {
      throw Error(e.kind(), "t=" + std::to_string(i * dt) + " stage=stiefel_step: " + e.what());
    }
    out.max_orthogonality_drift = std::max(out.max_orthogonality_drift, drift(st.U));
  }
  out.online_seconds = seconds_since(t_start);
  out.stats.wall_seconds = out.online_seconds;
  return out;
}

}  // namespace sdre
