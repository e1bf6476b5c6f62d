#pragma once

#include <functional>
#include <vector>

#include "sdre/densela.hpp"

namespace sdre {

struct NkConfig {
  double tol_nk = 1e-8;  // Frobenius norm of the residual
  int max_iters = 50;
  bool divergence_guard = true;
  // Computes the spectral abscissa of A - F P for the returned P.
  bool audit_closed_loop = true;
};

struct RiccatiReport {
  Mat P;
  int iterations = 0;  // number of Lyapunov solves
  double final_residual = 0.0;
  double closed_loop_max_real_eig = 0.0;
  bool warm_started = false;
  std::vector<double> residual_history;  // residual of P^0, P^1, ...
};

Mat sdre_residual(const Mat& A, const Mat& P, const Mat& F, const Mat& Q);

RiccatiReport nk_solve(const Mat& A, const Mat& F, const Mat& Q, const Mat& P0,
                       const NkConfig& cfg = {});

using SdcFunction = std::function<Mat(const Vec&)>;

// Solves the SDREs along an ordered list of states, each warm-started from
// the previous solution.
std::vector<RiccatiReport> cnk_sweep(const SdcFunction& A_of, const std::vector<Vec>& states,
                                     const Mat& F, const Mat& Q, const Mat& P_init,
                                     const NkConfig& cfg = {});

Mat feedback_gain(const Mat& P, const Mat& B, const Mat& R);

enum class SolverKind { NK, CNK, Oracle };

const char* to_string(SolverKind s);
SolverKind solver_from_string(const std::string& s);

// One SDRE solve as requested by a driver: NK from the null guess, NK from
// the supplied guess, or the Hamiltonian oracle.
RiccatiReport solve_sdre(SolverKind solver, const Mat& A, const Mat& F, const Mat& Q,
                         const Mat& guess, const NkConfig& cfg);

}  // namespace sdre
