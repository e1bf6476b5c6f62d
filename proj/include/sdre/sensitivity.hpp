#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sdre/fom.hpp"

namespace sdre {

struct EigCheck {
  std::string label;
  double value = 0.0;
  int expected_sign = 0;  // +1 or -1
  bool sign_ok() const { return expected_sign > 0 ? value > 0.0 : value < 0.0; }
};

struct GCurves {
  std::vector<double> t, g1, g2, g3;
};

struct SensitivityReport {
  double H_norm = 0.0;
  double perturb_radius = 0.0;
  double c = 0.0;
  double delta_mu_bound = 0.0;         // -1 + sqrt(1 + c)
  double delta_mu_linear = 0.0;        // 1 / (2 L_A L_y0 ||H||)
  double delta_t_bound = 0.0;          // closed form as printed in the appendix
  double delta_t_exact_root = 0.0;     // positive root of the stated quadratic
  double delta_t_linear = 0.0;         // 1 / (2 L_A ||A_cl(y0) y0|| ||H||)
  double L_A = 0.0, L_y0 = 0.0, L_onesided = 0.0;
  bool time_extension_holds = false;   // cond_L over the sampled window
  std::vector<EigCheck> closed_loop_eig_checks;
  std::vector<EigCheck> informational_checks;
  GCurves g;
  std::vector<double> lambda_curve;    // max eig of A(y_mu2(t)) - F P_mu1(t)
};

std::pair<Mat, double> solve_H(const Mat& A_cl);
double perturb_radius(double H_norm);
double delta_mu_bound(double L_A, double L_y0, double H_norm);
// L < -(1/t) log(2 L_A L_y0 dmu ||H||)
bool time_extension_predicate(double L, double t, double L_A, double L_y0, double dmu,
                              double H_norm);
// Variant with the integrator constant C of an order-p scheme; C = 0 recovers the above.
bool time_extension_predicate_discrete(double L, double t, double L_A, double L_y0, double dmu,
                                       double H_norm, double C, double dt, int order);
double delta_t_bound(double L_A, double acl_y0_norm, double H_norm);
double delta_t_bound_printed(double f_norm_sq, double f_dot_y0, double H_norm);
double delta_t_bound_root(double f_norm_sq, double f_dot_y0, double H_norm);

struct LipschitzEstimate {
  double L_A = 0.0;
  double L_onesided = 0.0;
};

// P1/P2 hold the SDRE solution at every sample of the respective trajectory.
LipschitzEstimate estimate_lipschitz(const Trajectory& t1, const Trajectory& t2,
                                     const QuadraticModel& model, const std::vector<Mat>& P1,
                                     const std::vector<Mat>& P2);

struct AppendixConfig {
  int N_h = 50;
  double sigma = 1e-3;
  double mu1 = 1.0;
  std::vector<double> dmu_checks{0.45, 0.40};
  std::vector<double> dt_checks{1.6, 1.5};
  double dmu_traj = 0.1;
  double T = 0.1;
  double dt = 1e-3;
};

SensitivityReport appendix_validate(const AppendixConfig& cfg = {});

}  // namespace sdre
