#include "sdre/sensitivity.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace sdre {

std::pair<Mat, double> solve_H(const Mat& A_cl) {
  if (eig_max_real(A_cl) >= 0.0)
    throw Error(ErrorKind::UnstableClosedLoop, "solve_H: closed-loop matrix is not stable");
  const Eigen::Index n = A_cl.rows();
  Mat H = lyap_solve(A_cl, -Mat::Identity(n, n));
  return {H, spectral_norm(H)};
}

double perturb_radius(double H_norm) { return 1.0 / (2.0 * H_norm); }

double delta_mu_bound(double L_A, double L_y0, double H_norm) {
  return 1.0 / (2.0 * L_A * L_y0 * H_norm);
}

bool time_extension_predicate(double L, double t, double L_A, double L_y0, double dmu,
                              double H_norm) {
  return L < -std::log(2.0 * L_A * L_y0 * dmu * H_norm) / t;
}

bool time_extension_predicate_discrete(double L, double t, double L_A, double L_y0, double dmu,
                                       double H_norm, double C, double dt, int order) {
  const double inner = 1.0 - 4.0 * C * std::pow(dt, order) * L_A * H_norm;
  if (inner <= 0.0) return false;
  return L < (std::log(inner) - std::log(2.0 * L_A * L_y0 * dmu * H_norm)) / t;
}

double delta_t_bound(double L_A, double acl_y0_norm, double H_norm) {
  return 1.0 / (2.0 * L_A * acl_y0_norm * H_norm);
}

double delta_t_bound_printed(double f_norm_sq, double f_dot_y0, double H_norm) {
  const double k = 1.0 / (2.0 * H_norm * H_norm);
  return (-f_dot_y0 + std::sqrt(f_dot_y0 * f_dot_y0 + k)) / f_norm_sq;
}

double delta_t_bound_root(double f_norm_sq, double f_dot_y0, double H_norm) {
  const double k = 1.0 / (2.0 * H_norm * H_norm);
  return (-f_dot_y0 + std::sqrt(f_dot_y0 * f_dot_y0 + f_norm_sq * k)) / f_norm_sq;
}

LipschitzEstimate estimate_lipschitz(const Trajectory& t1, const Trajectory& t2,
                                     const QuadraticModel& model, const std::vector<Mat>& P1,
                                     const std::vector<Mat>& P2) {
  const Eigen::Index ns = t1.states.cols();
  if (t2.states.cols() != ns || t1.times.size() != t2.times.size() ||
      static_cast<Eigen::Index>(P1.size()) != ns || static_cast<Eigen::Index>(P2.size()) != ns)
    throw Error(ErrorKind::GridMismatch, "estimate_lipschitz: sample counts differ");
  LipschitzEstimate est;
  est.L_A = 0.0;
  est.L_onesided = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ns; ++i) {
    const Vec y1 = t1.states.col(i), y2 = t2.states.col(i);
    const Vec d = y1 - y2;
    const double dn = d.norm();
    if (dn < 1e-14)
      throw Error(ErrorKind::CoincidentStates, "estimate_lipschitz: sample " + std::to_string(i));
    const Mat A1 = sdc_matrix(model, y1), A2 = sdc_matrix(model, y2);
    est.L_A = std::max(est.L_A, spectral_norm(A1 - A2) / dn);
    const Vec f1 = A1 * y1 - model.F * (P1[i] * y1);
    const Vec f2 = A2 * y2 - model.F * (P2[i] * y2);
    est.L_onesided = std::max(est.L_onesided, (f1 - f2).dot(d) / (dn * dn));
  }
  return est;
}

SensitivityReport appendix_validate(const AppendixConfig& cfg) {
  SensitivityReport rep;
  ReactionDiffusionOptions ro;
  ro.N_h = cfg.N_h;
  ro.sigma = cfg.sigma;
  const QuadraticModel model = build_reaction_diffusion(ro);
  const Vec shape = (std::numbers::pi * model.grid.x1.array()).sin().matrix();
  const Vec y0 = cfg.mu1 * shape;

  Mat P0;
  try {
    P0 = hamiltonian_riccati_oracle(sdc_matrix(model, y0), model.F, model.Q);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage=appendix ARE: ") + e.what());
  }
  const Mat Acl0 = sdc_matrix(model, y0) - model.F * P0;
  const auto [H0, Hn] = solve_H(Acl0);
  rep.H_norm = Hn;
  rep.perturb_radius = perturb_radius(Hn);
  const double diag_norm = shape.cwiseAbs().maxCoeff();
  rep.c = 1.0 / (4.0 * Hn * Hn * diag_norm * diag_norm);
  rep.delta_mu_bound = -cfg.mu1 + std::sqrt(cfg.mu1 * cfg.mu1 + rep.c);

  for (double dmu : cfg.dmu_checks) {
    const Vec y2 = (cfg.mu1 + dmu) * shape;
    EigCheck chk;
    chk.label = "dmu=" + std::to_string(dmu);
    chk.value = eig_max_real(sdc_matrix(model, y2) - model.F * P0);
    chk.expected_sign = dmu > rep.delta_mu_bound ? 1 : -1;
    rep.closed_loop_eig_checks.push_back(chk);
  }

  const Vec f = Acl0 * y0;
  rep.delta_t_bound = delta_t_bound_printed(f.squaredNorm(), f.dot(y0), Hn);
  rep.delta_t_exact_root = delta_t_bound_root(f.squaredNorm(), f.dot(y0), Hn);
  auto dt_check = [&](double dt) {
    const Vec y1 = fom_step(model, y0, P0, dt);
    EigCheck chk;
    chk.label = "dt=" + std::to_string(dt);
    chk.value = eig_max_real(sdc_matrix(model, y1) - model.F * P0);
    chk.expected_sign = dt > rep.delta_t_bound ? 1 : -1;
    return chk;
  };
  for (double dt : cfg.dt_checks) rep.closed_loop_eig_checks.push_back(dt_check(dt));
  rep.informational_checks.push_back(dt_check(1.7));

  ParamGrid pair;
  pair.bounds = default_box(Problem::ReactionDiffusion);
  pair.values = {{cfg.mu1, 0.0}, {cfg.mu1 + cfg.dmu_traj, 0.0}};
  pair.n1 = 2;
  pair.n2 = 1;
  const int steps = step_count(cfg.T, cfg.dt);
  std::vector<Mat> P1(steps + 1), P2(steps + 1);
  SweepOptions so;
  so.solver = SolverKind::CNK;
  so.initial_guess = P0;
  so.on_solve = [&](int i, int j, const Vec&, const RiccatiReport& r) {
    (j == 0 ? P1 : P2)[i] = r.P;
  };
  NkConfig nk;
  FomResult traj;
  try {
    traj = fom_sweep(model, pair, cfg.T, cfg.dt, nk, so);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage=appendix trajectories: ") + e.what());
  }
  const LipschitzEstimate lip = estimate_lipschitz(traj.traj[0], traj.traj[1], model, P1, P2);
  rep.L_A = lip.L_A;
  rep.L_onesided = lip.L_onesided;
  rep.L_y0 = shape.norm();
  rep.delta_mu_linear = delta_mu_bound(rep.L_A, rep.L_y0, Hn);
  rep.delta_t_linear = delta_t_bound(rep.L_A, f.norm(), Hn);

  rep.time_extension_holds = true;
  for (int i = 0; i <= steps; ++i) {
    const double t = traj.traj[0].times[i];
    const Vec y1 = traj.traj[0].states.col(i), y2 = traj.traj[1].states.col(i);
    const Mat A1 = sdc_matrix(model, y1), A2 = sdc_matrix(model, y2);
    const double Hn_t = solve_H(A1 - model.F * P1[i]).second;
    rep.g.t.push_back(t);
    rep.g.g1.push_back(spectral_norm(A1 - A2));
    rep.g.g2.push_back(rep.L_A * rep.L_y0 * cfg.dmu_traj * std::exp(rep.L_onesided * t));
    rep.g.g3.push_back(1.0 / (2.0 * Hn_t));
    rep.lambda_curve.push_back(eig_max_real(A2 - model.F * P1[i]));
    if (t > 0.0 && !time_extension_predicate(rep.L_onesided, t, rep.L_A, rep.L_y0, cfg.dmu_traj,
                                             Hn_t))
      rep.time_extension_holds = false;
  }
  return rep;
}

}  // namespace sdre
