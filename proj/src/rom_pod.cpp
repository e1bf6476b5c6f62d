#include "sdre/rom_pod.hpp"

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

}  // namespace

Vec kron_self(const Vec& z) {
  const Eigen::Index r = z.size();
  Vec out(r * r);
  for (Eigen::Index j = 0; j < r; ++j) out.segment(j * r, r) = z(j) * z;
  return out;
}

Mat basis_pairs(const QuadraticModel& model, const Mat& V) {
  const Eigen::Index n = V.rows(), r = V.cols();
  Mat out(n, r * r);
  if (model.D.size() != 0) {
    const Mat DV = model.D * V;
    for (Eigen::Index j = 0; j < r; ++j)
      for (Eigen::Index k = 0; k < r; ++k)
        out.col(j * r + k) = -(V.col(j).array() * DV.col(k).array()).matrix();
    return out;
  }
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index k = 0; k < r; ++k) out.col(j * r + k) = model.quad(V.col(j), V.col(k));
  return out;
}

ReducedOperators reduce_operators(const QuadraticModel& model, const Mat& V) {
  if (V.rows() != model.n()) throw Error(ErrorKind::DimensionMismatch, "reduce_operators");
  const Eigen::Index r = V.cols();
  if ((V.transpose() * V - Mat::Identity(r, r)).norm() > 1e-10)
    throw Error(ErrorKind::NonOrthonormalBasis, "reduce_operators: V^T V != I");
  ReducedOperators ops;
  ops.basis = V;
  ops.A_r = V.transpose() * model.A * V;
  ops.T_r = V.transpose() * basis_pairs(model, V);
  ops.B_r = V.transpose() * model.B;
  ops.Q_r = V.transpose() * model.Q * V;
  ops.Rinv_Brt = model.Rinv_Bt * V;
  ops.F_r = ops.B_r * ops.Rinv_Brt;
  ops.F_r = 0.5 * (ops.F_r + ops.F_r.transpose()).eval();
  ops.Q_r = 0.5 * (ops.Q_r + ops.Q_r.transpose()).eval();
  return ops;
}

Mat reduced_sdc(const ReducedOperators& ops, const Vec& z) {
  const Eigen::Index r = ops.A_r.rows();
  Mat out = ops.A_r;
  for (Eigen::Index j = 0; j < r; ++j) out.col(j) += ops.T_r.middleCols(j * r, r) * z;
  return out;
}

SnapshotSet snapshots_from(const std::vector<Trajectory>& traj, int count) {
  if (traj.empty()) throw Error(ErrorKind::Config, "snapshots: empty grid");
  if (count < 1) throw Error(ErrorKind::Config, "snapshots: count < 1");
  const int steps = static_cast<int>(traj[0].states.cols()) - 1;
  const double dt = steps > 0 ? traj[0].times[1] - traj[0].times[0] : 0.0;
  std::vector<int> idx;
  for (int k = 0; k < count; ++k)
    idx.push_back(count == 1 ? 0 : static_cast<int>(std::lround(double(k) * steps / (count - 1))));
  SnapshotSet out;
  out.S.resize(traj[0].states.rows(), static_cast<Eigen::Index>(traj.size() * idx.size()));
  Eigen::Index c = 0;
  for (std::size_t j = 0; j < traj.size(); ++j)
    for (int i : idx) {
      out.S.col(c++) = traj[j].states.col(i);
      out.provenance.emplace_back(static_cast<int>(j), i * dt);
    }
  return out;
}

SnapshotSet collect_snapshots(const QuadraticModel& model, const ParamGrid& training, double T,
                              double dt, int count, const NkConfig& cfg, const SweepOptions& opt,
                              SolveStats* stats) {
  if (training.size() == 0) throw Error(ErrorKind::Config, "collect_snapshots: empty grid");
  if (count < 1) throw Error(ErrorKind::Config, "collect_snapshots: count < 1");
  const FomResult fom = fom_sweep(model, training, T, dt, cfg, opt);
  if (stats) *stats = fom.stats;
  return snapshots_from(fom.traj, count);
}

Mat pod_basis(const SnapshotSet& snaps, double tol) { return svd_truncate(snaps.S, tol).basis; }

Mat pod_basis_rank(const SnapshotSet& snaps, int r) {
  if (r < 1 || r > std::min(snaps.S.rows(), snaps.S.cols()))
    throw Error(ErrorKind::Config, "pod_basis_rank: rank out of range");
  Eigen::BDCSVD<Mat> svd(snaps.S, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(r);
}

RomResult pod_run(const QuadraticModel& model, const ReducedOperators& ops, const ParamGrid& test,
                  double T, double dt, const NkConfig& cfg, const SweepOptions& opt) {
  const int steps = step_count(T, dt);
  const int p = static_cast<int>(test.size());
  const Eigen::Index r = ops.rank();
  const auto t_start = Clock::now();
  RomResult out;
  out.r1 = static_cast<int>(r);
  out.traj.resize(p);
  std::vector<Vec> z(p);
  for (int j = 0; j < p; ++j) {
    Trajectory& tr = out.traj[j];
    tr.states.resize(model.n(), steps + 1);
    tr.controls.resize(model.m(), steps + 1);
    tr.times.resize(steps + 1);
    for (int i = 0; i <= steps; ++i) tr.times[i] = i * dt;
    z[j] = ops.basis.transpose() *
           (opt.initial_states.size() ? Vec(opt.initial_states.col(j))
                                      : initial_state(model.problem, test.values[j], model.grid));
    tr.states.col(0) = ops.basis * z[j];
  }
  Mat time_guess = Mat::Zero(r, r);
  std::vector<Mat> K(p);
  for (int i = 0; i <= steps; ++i) {
    Mat guess = time_guess;
    for (int j = 0; j < p; ++j) {
      const auto t0 = Clock::now();
      RiccatiReport rep;
      try {
        rep = solve_sdre(opt.solver, reduced_sdc(ops, z[j]), ops.F_r, ops.Q_r, guess, cfg);
      } catch (const Error& e) {
        throw Error(e.kind(), "t=" + std::to_string(i * dt) + " param=" + std::to_string(j) +
                                  " stage=pod: " + e.what());
      }
      out.stats.add(rep, seconds_since(t0));
      if (opt.on_solve) opt.on_solve(i, j, z[j], rep);
      out.traj[j].riccati_iters.push_back(rep.iterations);
      K[j] = ops.Rinv_Brt * rep.P;
      out.traj[j].controls.col(i) = -K[j] * z[j];
      if (j == 0) time_guess = rep.P;
      guess = std::move(rep.P);
    }
    if (i == steps) break;
    parallel_for(p, opt.threads, [&](int j) {
      auto g = [&](const Vec& w) -> Vec {
        return ops.A_r * w + ops.T_r * kron_self(w) - ops.B_r * (K[j] * w);
      };
      const Vec zh = z[j] + 0.5 * dt * g(z[j]);
      z[j] = z[j] + dt * g(zh);
      if (!z[j].allFinite())
        throw Error(ErrorKind::NonFinite, "t=" + std::to_string(i * dt) + " stage=pod_step");
      out.traj[j].states.col(i + 1) = ops.basis * z[j];
    });
  }
  out.online_seconds = seconds_since(t_start);
  out.stats.wall_seconds = out.online_seconds;
  return out;
}

Mat enrich_basis(const Mat& U0, const Mat& M, double tol, int r2_override) {
  if (U0.rows() != M.rows()) throw Error(ErrorKind::DimensionMismatch, "enrich_basis");
  if (!(tol > 0.0 && tol < 1.0)) throw Error(ErrorKind::InvalidTolerance, "enrich_basis");
  const Mat Mp = M - U0 * (U0.transpose() * M);
  const double mnorm = M.norm();
  if (mnorm == 0.0 || Mp.norm() <= 1e-12 * mnorm) return U0;
  Eigen::BDCSVD<Mat> svd(Mp, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  Eigen::Index kept = 0;
  while (kept < s.size() && s(kept) > 1e-12 * s(0)) ++kept;
  const double total = s.head(kept).squaredNorm();
  double acc = 0.0;
  Eigen::Index r2 = 0;
  while (r2 < kept) {
    acc += s(r2) * s(r2);
    ++r2;
    if (acc / total > tol) break;
  }
  if (r2_override > 0) r2 = std::min<Eigen::Index>(r2_override, kept);
  Mat W = svd.matrixU().leftCols(r2);
  W -= U0 * (U0.transpose() * W);
  Mat out(U0.rows(), U0.cols() + r2);
  out << U0, W;
  return qr_retract(out).first;
}

const char* to_string(Enrichment e) {
  switch (e) {
    case Enrichment::None: return "none";
    case Enrichment::P: return "P";
    case Enrichment::K: return "K";
  }
  return "?";
}

Mat enrichment_source(const QuadraticModel& model, const ParamGrid& grid, Enrichment kind, int s,
                      const NkConfig& cfg) {
  if (kind == Enrichment::None) return Mat(model.n(), 0);
  if (s < 1 || s > static_cast<int>(grid.size()))
    throw Error(ErrorKind::Config, "enrichment: s must be in [1, |grid|]");
  // s parameters spread evenly through the ordered grid; s=1 picks the first.
  const int p = static_cast<int>(grid.size());
  std::vector<Vec> states;
  for (int k = 0; k < s; ++k) {
    const int j = s == 1 ? 0 : static_cast<int>(std::lround(double(k) * (p - 1) / (s - 1)));
    states.push_back(initial_state(model.problem, grid.values[j], model.grid));
  }
  const auto reps = cnk_sweep([&](const Vec& y) { return sdc_matrix(model, y); }, states, model.F,
                              model.Q, Mat::Zero(model.n(), model.n()), cfg);
  const Eigen::Index n = model.n(), m = model.m();
  Mat M(n, kind == Enrichment::P ? n * s : m * s);
  for (int j = 0; j < s; ++j) {
    if (kind == Enrichment::P)
      M.middleCols(j * n, n) = reps[j].P;
    else
      M.middleCols(j * m, m) = (model.Rinv_Bt * reps[j].P).transpose();
  }
  return M;
}

}  // namespace sdre
