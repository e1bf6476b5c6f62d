#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "sdre/densela.hpp"

namespace sdre {

enum class Problem { Burgers1d, Burgers2d, ReactionDiffusion };

const char* to_string(Problem p);
Problem problem_from_string(const std::string& s);

struct Interval {
  double lo, hi;
};

struct Grid {
  int dim = 1;
  int n_per_axis = 0;
  double h = 0.0;
  double weight = 0.0;  // quadrature weight per node: h or h^2
  Vec x1, x2;           // node coordinates; x2 empty in 1D
  Eigen::Index size() const { return x1.size(); }
};

using Bilinear = std::function<Vec(const Vec&, const Vec&)>;

struct QuadraticModel {
  Problem problem = Problem::Burgers1d;
  Mat A;
  Mat D;  // first-derivative (divergence) operator for Burgers; empty otherwise
  Bilinear quad;
  // Replaces the quad-derived SDC when set; the drift is then sdc(y)*y.
  std::function<Mat(const Vec&)> sdc_override;
  Mat B, Q, R;
  Mat F;  // B R^{-1} B^T
  Mat Rinv_Bt;
  Grid grid;
  std::vector<int> control_idx, obs_idx;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Vec rhs(const Vec& y) const;
};

struct Burgers1dOptions {
  int N_h = 100;
  Interval domain{-5.0, 30.0};
  double advect = 20.0;
  double control_weight = 0.1;
  std::vector<Interval> omega_c{{-1.0, 1.0}, {5.0, 7.0}};
  std::vector<Interval> omega_o{{2.0, 4.0}, {8.0, 10.0}};
};

struct Burgers2dOptions {
  int n_per_axis = 20;
  Interval domain{-10.0, 10.0};
  double advect = 20.0;
  double control_weight = 0.1;
  Interval omega_c{-5.0, 0.0};  // square [lo,hi]^2
  Interval omega_o{0.0, 5.0};
};

struct ReactionDiffusionOptions {
  int N_h = 50;
  Interval domain{0.0, 2.0};
  double sigma = 1e-3;
};

// Upwind first derivative with a zero inflow ghost on the left.
Mat derivative_1d(int n, double h);

QuadraticModel build_burgers1d(const Burgers1dOptions& opt = {});
QuadraticModel build_burgers2d(const Burgers2dOptions& opt = {});
QuadraticModel build_reaction_diffusion(const ReactionDiffusionOptions& opt = {});

Mat sdc_matrix(const QuadraticModel& model, const Vec& y);

using Param = std::array<double, 2>;

struct ParamBox {
  Interval mu1, mu2;
};

ParamBox default_box(Problem p);

Vec initial_state(Problem problem, const Param& mu, const Grid& grid);

struct ParamGrid {
  std::vector<Param> values;
  ParamBox bounds;
  int n1 = 0, n2 = 0;
  std::size_t size() const { return values.size(); }
};

ParamGrid make_param_grid(const ParamBox& box, int n1, int n2);

// Ensemble of initial states, one column per parameter.
Mat initial_ensemble(const QuadraticModel& model, const ParamGrid& grid);

}  // namespace sdre
