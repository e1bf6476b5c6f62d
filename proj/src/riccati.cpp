#include "sdre/riccati.hpp"

#include <cmath>
#include <string>

namespace sdre {

Mat sdre_residual(const Mat& A, const Mat& P, const Mat& F, const Mat& Q) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || P.rows() != n || P.cols() != n || F.rows() != n || F.cols() != n ||
      Q.rows() != n || Q.cols() != n)
    throw Error(ErrorKind::DimensionMismatch, "sdre_residual");
  Mat AtP = A.transpose() * P;
  return AtP + AtP.transpose() - P * F * P + Q;
}

RiccatiReport nk_solve(const Mat& A, const Mat& F, const Mat& Q, const Mat& P0,
                       const NkConfig& cfg) {
  if (P0.rows() != A.rows() || P0.cols() != A.cols())
    throw Error(ErrorKind::DimensionMismatch, "nk_solve: guess has the wrong size");
  if (!(cfg.tol_nk > 0.0) || cfg.max_iters < 1)
    throw Error(ErrorKind::InvalidTolerance, "nk_solve: need tol_nk > 0 and max_iters >= 1");
  RiccatiReport rep;
  rep.warm_started = P0.norm() != 0.0;
  Mat P = P0;
  double res = sdre_residual(A, P, F, Q).norm();
  rep.residual_history.push_back(res);
  int it = 0;
  while (!(res < cfg.tol_nk)) {
    if (!std::isfinite(res)) throw Error(ErrorKind::NonFinite, "nk_solve: residual is not finite");
    if (it >= cfg.max_iters)
      throw Error(ErrorKind::MaxItersExceeded,
                  "nk_solve: residual " + std::to_string(res) + " after " + std::to_string(it));
    const Mat Acl = A - F * P;
    const Mat PFP = P * F * P;
    double abscissa = 0.0;
    Mat Pn = lyap_solve(Acl, -PFP - Q, &abscissa);
    if (cfg.divergence_guard && abscissa >= 0.0) {
      throw Error(it == 0 ? ErrorKind::NonStabilizingGuess : ErrorKind::NonConvergence,
                  "nk_solve: closed loop at iterate " + std::to_string(it) +
                      " has max real eigenvalue " + std::to_string(abscissa));
    }
    P = 0.5 * (Pn + Pn.transpose());
    ++it;
    res = sdre_residual(A, P, F, Q).norm();
    rep.residual_history.push_back(res);
  }
  rep.P = std::move(P);
  rep.iterations = it;
  rep.final_residual = res;
  rep.closed_loop_max_real_eig = cfg.audit_closed_loop ? eig_max_real(A - F * rep.P) : -1.0;
  if (cfg.divergence_guard && cfg.audit_closed_loop && rep.closed_loop_max_real_eig >= 0.0)
    throw Error(ErrorKind::NonConvergence, "nk_solve: converged P is not stabilizing");
  return rep;
}

std::vector<RiccatiReport> cnk_sweep(const SdcFunction& A_of, const std::vector<Vec>& states,
                                     const Mat& F, const Mat& Q, const Mat& P_init,
                                     const NkConfig& cfg) {
  if (states.empty()) throw Error(ErrorKind::DimensionMismatch, "cnk_sweep: empty state list");
  std::vector<RiccatiReport> out;
  out.reserve(states.size());
  Mat guess = P_init;
  for (std::size_t k = 0; k < states.size(); ++k) {
    try {
      out.push_back(nk_solve(A_of(states[k]), F, Q, guess, cfg));
    } catch (const Error& e) {
      throw Error(e.kind(), "cascade index " + std::to_string(k) + ": " + e.what());
    }
    guess = out.back().P;
  }
  return out;
}

Mat feedback_gain(const Mat& P, const Mat& B, const Mat& R) {
  if (R.rows() != R.cols() || R.rows() != B.cols() || B.rows() != P.rows())
    throw Error(ErrorKind::DimensionMismatch, "feedback_gain");
  Eigen::LLT<Mat> llt(R);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularR, "R is not positive definite");
  return llt.solve(B.transpose() * P);
}

const char* to_string(SolverKind s) {
  switch (s) {
    case SolverKind::NK: return "nk";
    case SolverKind::CNK: return "cnk";
    case SolverKind::Oracle: return "oracle";
  }
  return "?";
}

SolverKind solver_from_string(const std::string& s) {
  if (s == "nk") return SolverKind::NK;
  if (s == "cnk") return SolverKind::CNK;
  if (s == "oracle") return SolverKind::Oracle;
  throw Error(ErrorKind::Config, "solver must be nk, cnk or oracle, got '" + s + "'");
}

RiccatiReport solve_sdre(SolverKind solver, const Mat& A, const Mat& F, const Mat& Q,
                         const Mat& guess, const NkConfig& cfg) {
  switch (solver) {
    case SolverKind::NK:
      return nk_solve(A, F, Q, Mat::Zero(A.rows(), A.cols()), cfg);
    case SolverKind::CNK:
      return nk_solve(A, F, Q, guess, cfg);
    case SolverKind::Oracle: {
      RiccatiReport rep;
      rep.P = hamiltonian_riccati_oracle(A, F, Q);
      rep.final_residual = sdre_residual(A, rep.P, F, Q).norm();
      rep.residual_history.push_back(rep.final_residual);
      rep.closed_loop_max_real_eig = cfg.audit_closed_loop ? eig_max_real(A - F * rep.P) : -1.0;
      return rep;
    }
  }
  throw Error(ErrorKind::Config, "unknown solver");
}

}  // namespace sdre
