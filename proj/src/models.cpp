#include "sdre/models.hpp"

#include <cmath>
#include <numbers>

namespace sdre {

const char* to_string(Problem p) {
  switch (p) {
    case Problem::Burgers1d: return "burgers1d";
    case Problem::Burgers2d: return "burgers2d";
    case Problem::ReactionDiffusion: return "reaction_diffusion";
  }
  return "?";
}

Problem problem_from_string(const std::string& s) {
  if (s == "burgers1d") return Problem::Burgers1d;
  if (s == "burgers2d") return Problem::Burgers2d;
  if (s == "reaction_diffusion") return Problem::ReactionDiffusion;
  throw Error(ErrorKind::Config, "unknown problem '" + s + "'");
}

Vec QuadraticModel::rhs(const Vec& y) const {
  if (sdc_override) return sdc_override(y) * y;
  return A * y + quad(y, y);
}

Mat derivative_1d(int n, double h) {
  Mat D = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    D(i, i) = 1.0 / h;
    if (i > 0) D(i, i - 1) = -1.0 / h;
  }
  return D;
}

namespace {

constexpr double kMaskSlack = 1e-12;

bool inside(double x, const Interval& iv) {
  return x >= iv.lo - kMaskSlack && x <= iv.hi + kMaskSlack;
}

void finish_weights(QuadraticModel& m, double control_weight) {
  const Eigen::Index n = m.n();
  const auto mc = static_cast<Eigen::Index>(m.control_idx.size());
  if (mc == 0) throw Error(ErrorKind::EmptyMask, "control region captures no node");
  if (m.obs_idx.empty()) throw Error(ErrorKind::EmptyMask, "observation region captures no node");
  m.B = Mat::Zero(n, mc);
  for (Eigen::Index k = 0; k < mc; ++k) m.B(m.control_idx[k], k) = 1.0;
  m.Q = Mat::Zero(n, n);
  for (int i : m.obs_idx) m.Q(i, i) = m.grid.weight;
  m.R = control_weight * m.grid.weight * Mat::Identity(mc, mc);
  m.Rinv_Bt = m.R.llt().solve(m.B.transpose());
  m.F = m.B * m.Rinv_Bt;
}

Bilinear burgers_quad(const Mat& D) {
  return [D](const Vec& y, const Vec& z) -> Vec { return -(y.array() * (D * z).array()).matrix(); };
}

}  // namespace

QuadraticModel build_burgers1d(const Burgers1dOptions& opt) {
  if (opt.N_h < 8) throw Error(ErrorKind::DimensionMismatch, "build_burgers1d: N_h < 8");
  QuadraticModel m;
  m.problem = Problem::Burgers1d;
  const int n = opt.N_h;
  m.grid.dim = 1;
  m.grid.n_per_axis = n;
  m.grid.h = (opt.domain.hi - opt.domain.lo) / (n - 1);
  m.grid.weight = m.grid.h;
  m.grid.x1 = Vec::LinSpaced(n, opt.domain.lo, opt.domain.hi);
  m.D = derivative_1d(n, m.grid.h);
  m.A = -opt.advect * m.D;
  m.quad = burgers_quad(m.D);
  for (int i = 0; i < n; ++i) {
    const double x = m.grid.x1(i);
    bool c = false, o = false;
    for (const Interval& iv : opt.omega_c) c = c || inside(x, iv);
    for (const Interval& iv : opt.omega_o) o = o || inside(x, iv);
    if (c) m.control_idx.push_back(i);
    if (o) m.obs_idx.push_back(i);
  }
  finish_weights(m, opt.control_weight);
  return m;
}

QuadraticModel build_burgers2d(const Burgers2dOptions& opt) {
  if (opt.n_per_axis < 4) throw Error(ErrorKind::DimensionMismatch, "build_burgers2d: n < 4");
  QuadraticModel m;
  m.problem = Problem::Burgers2d;
  const int n = opt.n_per_axis;
  const double h = (opt.domain.hi - opt.domain.lo) / (n - 1);
  m.grid.dim = 2;
  m.grid.n_per_axis = n;
  m.grid.h = h;
  m.grid.weight = h * h;
  m.grid.x1.resize(n * n);
  m.grid.x2.resize(n * n);
  // node k = i + n*j sits at (x_i, x_j)
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      m.grid.x1(i + n * j) = opt.domain.lo + i * h;
      m.grid.x2(i + n * j) = opt.domain.lo + j * h;
    }
  const Mat D = derivative_1d(n, h);
  const Mat I = Mat::Identity(n, n);
  Mat Dx = Mat::Zero(n * n, n * n), Dy = Mat::Zero(n * n, n * n);
  for (int j = 0; j < n; ++j) Dx.block(j * n, j * n, n, n) = D;
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l)
      if (D(j, l) != 0.0) Dy.block(j * n, l * n, n, n) = D(j, l) * I;
  m.D = Dx + Dy;
  m.A = -opt.advect * m.D;
  m.quad = burgers_quad(m.D);
  for (int k = 0; k < n * n; ++k) {
    const double a = m.grid.x1(k), b = m.grid.x2(k);
    if (inside(a, opt.omega_c) && inside(b, opt.omega_c)) m.control_idx.push_back(k);
    if (inside(a, opt.omega_o) && inside(b, opt.omega_o)) m.obs_idx.push_back(k);
  }
  finish_weights(m, opt.control_weight);
  return m;
}

QuadraticModel build_reaction_diffusion(const ReactionDiffusionOptions& opt) {
  if (opt.N_h < 8) throw Error(ErrorKind::DimensionMismatch, "build_reaction_diffusion: N_h < 8");
  QuadraticModel m;
  m.problem = Problem::ReactionDiffusion;
  const int n = opt.N_h;
  const double h = (opt.domain.hi - opt.domain.lo) / (n - 1);
  m.grid.dim = 1;
  m.grid.n_per_axis = n;
  m.grid.h = h;
  m.grid.weight = h;
  m.grid.x1 = Vec::LinSpaced(n, opt.domain.lo, opt.domain.hi);
  Mat A0 = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A0(i, i) = -2.0;
    if (i > 0) A0(i, i - 1) = 1.0;
    if (i < n - 1) A0(i, i + 1) = 1.0;
  }
  A0(0, 0) = -1.0;
  A0(n - 1, n - 1) = -1.0;
  A0 /= h * h;
  m.A = opt.sigma * A0;
  m.quad = [](const Vec& y, const Vec& z) -> Vec { return (y.array() * z.array()).matrix(); };
  const Mat A = m.A;
  m.sdc_override = [A](const Vec& y) -> Mat {
    Mat out = A;
    out.diagonal() += y.cwiseProduct(y);
    return out;
  };
  for (int i = 0; i < n; ++i) {
    m.control_idx.push_back(i);
    m.obs_idx.push_back(i);
  }
  m.B = Mat::Identity(n, n);
  m.Q = h * Mat::Identity(n, n);
  m.R = h * Mat::Identity(n, n);
  m.Rinv_Bt = Mat::Identity(n, n) / h;
  m.F = Mat::Identity(n, n) / h;
  return m;
}

Mat sdc_matrix(const QuadraticModel& model, const Vec& y) {
  if (y.size() != model.n()) throw Error(ErrorKind::DimensionMismatch, "sdc_matrix: state size");
  if (model.sdc_override) return model.sdc_override(y);
  if (model.D.size() != 0) {
    Mat out = model.A;
    out.diagonal() -= model.D * y;
    return out;
  }
  // column j is A e_j + quad(e_j, y)
  Mat out = model.A;
  Vec e = Vec::Zero(model.n());
  for (Eigen::Index j = 0; j < model.n(); ++j) {
    e(j) = 1.0;
    out.col(j) += model.quad(e, y);
    e(j) = 0.0;
  }
  return out;
}

ParamBox default_box(Problem p) {
  switch (p) {
    case Problem::Burgers1d: return {{0.1, 0.5}, {0.2, 1.5}};
    case Problem::Burgers2d: return {{0.01, 0.05}, {0.1, 0.3}};
    case Problem::ReactionDiffusion: return {{1.0, 10.0}, {0.0, 0.0}};
  }
  return {};
}

Vec initial_state(Problem problem, const Param& mu, const Grid& grid) {
  const ParamBox box = default_box(problem);
  const double slack = 1e-12;
  if (mu[0] < box.mu1.lo - slack || mu[0] > box.mu1.hi + slack ||
      (problem != Problem::ReactionDiffusion &&
       (mu[1] < box.mu2.lo - slack || mu[1] > box.mu2.hi + slack)))
    throw Error(ErrorKind::OutOfBounds, "initial_state: parameter outside the problem box");
  switch (problem) {
    case Problem::Burgers1d:
      return (mu[0] * (-mu[1] * grid.x1.array().square()).exp()).matrix();
    case Problem::Burgers2d:
      return (mu[0] * (-mu[1] * ((grid.x1.array() + 2.0).square() +
                                 (grid.x2.array() + 2.0).square()))
                          .exp())
          .matrix();
    case Problem::ReactionDiffusion:
      return (mu[0] * (std::numbers::pi * grid.x1.array()).sin()).matrix();
  }
  return {};
}

ParamGrid make_param_grid(const ParamBox& box, int n1, int n2) {
  if (n1 < 1 || n2 < 1) throw Error(ErrorKind::DegenerateBox, "grid counts must be >= 1");
  if (box.mu1.hi < box.mu1.lo || box.mu2.hi < box.mu2.lo ||
      (n1 > 1 && box.mu1.hi == box.mu1.lo) || (n2 > 1 && box.mu2.hi == box.mu2.lo))
    throw Error(ErrorKind::DegenerateBox, "parameter box is empty along a refined axis");
  auto node = [](const Interval& iv, int n, int k) {
    if (n == 1) return iv.lo;
    if (k == n - 1) return iv.hi;
    return iv.lo + (iv.hi - iv.lo) * k / (n - 1);
  };
  ParamGrid g;
  g.bounds = box;
  g.n1 = n1;
  g.n2 = n2;
  for (int j = 0; j < n1; ++j)
    for (int k = 0; k < n2; ++k) g.values.push_back({node(box.mu1, n1, j), node(box.mu2, n2, k)});
  return g;
}

Mat initial_ensemble(const QuadraticModel& model, const ParamGrid& grid) {
  Mat Y(model.n(), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j)
    Y.col(static_cast<Eigen::Index>(j)) = initial_state(model.problem, grid.values[j], model.grid);
  return Y;
}

}  // namespace sdre
