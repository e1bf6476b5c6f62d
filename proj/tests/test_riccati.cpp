#include <doctest.h>

#include "oracles.hpp"
#include "sdre/models.hpp"
#include "sdre/riccati.hpp"

using namespace sdre;

namespace {

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

struct Instance {
  Mat A, F, Q, P0;
};

// Stable A with a null guess, or unstable A with full actuation and a shifted guess.
Instance make_instance(std::mt19937& g, int n, bool stable) {
  Instance in;
  if (stable) {
    in.A = oracle::rand_stable(g, n, 0.2);
    Mat B = oracle::randn(g, n, std::max(1, n / 3));
    in.F = B * B.transpose();
    in.P0 = Mat::Zero(n, n);
  } else {
    in.A = oracle::randn(g, n, n);
    in.F = Mat::Identity(n, n);
    const double a = Eigen::EigenSolver<Mat>(in.A).eigenvalues().real().maxCoeff();
    in.P0 = (std::max(a, 0.0) + 1.0) * Mat::Identity(n, n);
  }
  Mat C = oracle::randn(g, n, n);
  in.Q = C.transpose() * C / n + 0.1 * Mat::Identity(n, n);
  return in;
}

}  // namespace

TEST_CASE("sdre_residual") {
  std::mt19937 g(1);
  Mat A = oracle::randn(g, 4, 4), F = oracle::rand_sym(g, 4), Q = oracle::rand_sym(g, 4);
  CHECK((sdre_residual(A, Mat::Zero(4, 4), F, Q) - Q).norm() == 0.0);
  Mat R = sdre_residual(A, oracle::rand_sym(g, 4), F, Q);
  CHECK((R - R.transpose()).norm() < 1e-12);
  CHECK(std::abs(sdre_residual(scalar(1), scalar(1 + std::sqrt(2.0)), scalar(1), scalar(1))(0, 0)) < 1e-12);
  CHECK_THROWS_AS(sdre_residual(A, Mat::Zero(3, 3), F, Q), Error);
}

TEST_CASE("nk_solve scalar closed form") {
  NkConfig cfg;
  cfg.tol_nk = 1e-10;
  auto rep = nk_solve(scalar(1), scalar(1), scalar(1), scalar(2), cfg);
  CHECK(rep.P(0, 0) == doctest::Approx(1 + std::sqrt(2.0)).epsilon(1e-10));
  CHECK(rep.final_residual < 1e-10);
  CHECK(rep.closed_loop_max_real_eig < 0.0);
  CHECK(rep.warm_started);
}

TEST_CASE("nk_solve with a converged guess performs no Lyapunov solve") {
  std::mt19937 g(2);
  Mat A = oracle::rand_stable(g, 5);
  auto rep = nk_solve(A, Mat::Identity(5, 5), Mat::Zero(5, 5), Mat::Zero(5, 5));
  CHECK(rep.P.norm() == 0.0);
  CHECK(rep.iterations == 0);
  CHECK(!rep.warm_started);
}

TEST_CASE("nk_solve errors") {
  try {
    nk_solve(scalar(1), scalar(1), scalar(1), scalar(0));
    FAIL("expected NonStabilizingGuess");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonStabilizingGuess);
  }
  NkConfig cfg;
  cfg.max_iters = 1;
  try {
    nk_solve(scalar(1), scalar(1), scalar(1), scalar(10), cfg);
    FAIL("expected MaxItersExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MaxItersExceeded);
  }
  cfg = NkConfig{};
  cfg.tol_nk = 0.0;
  CHECK_THROWS_AS(nk_solve(scalar(-1), scalar(1), scalar(1), scalar(0), cfg), Error);
}

TEST_CASE("triple-solver agreement and residual monotonicity") {
  std::mt19937 g(3);
  NkConfig cfg;
  cfg.tol_nk = 1e-11;
  int checked = 0;
  for (int k = 0; k < 24; ++k) {
    const int n = 2 + (k * 7) % 29;
    Instance in = make_instance(g, n, k % 2 == 0);
    cfg.tol_nk = 1e-11 * (1.0 + in.Q.norm());
    auto rep = nk_solve(in.A, in.F, in.Q, in.P0, cfg);
    Mat Po = hamiltonian_riccati_oracle(in.A, in.F, in.Q);
    CHECK((rep.P - Po).norm() <= 1e-8 * Po.norm());
    auto sw = cnk_sweep([&](const Vec&) { return in.A; }, {Vec::Zero(n)}, in.F, in.Q, in.P0, cfg);
    CHECK((sw[0].P - rep.P).norm() == 0.0);
    CHECK(sw[0].iterations == rep.iterations);
    CHECK(rep.closed_loop_max_real_eig < 0.0);
    CHECK((rep.P - rep.P.transpose()).norm() <= 1e-10 * rep.P.norm());
    const auto& h = rep.residual_history;
    for (std::size_t i = 2; i + 1 < h.size(); ++i) CHECK(h[i + 1] < h[i]);
    ++checked;
  }
  CHECK(checked == 24);
}

TEST_CASE("cascade agrees with independent solves and saves iterations on the 1D sweep") {
  const QuadraticModel model = build_burgers1d();
  const ParamGrid grid = make_param_grid(default_box(Problem::Burgers1d), 5, 5);
  std::vector<Vec> states;
  for (const auto& mu : grid.values) states.push_back(initial_state(model.problem, mu, model.grid));
  const auto A_of = [&](const Vec& y) { return sdc_matrix(model, y); };
  const Mat Z = Mat::Zero(model.n(), model.n());
  const auto cas = cnk_sweep(A_of, states, model.F, model.Q, Z);
  NkConfig tight;
  tight.tol_nk = 1e-10;
  const auto cas_tight = cnk_sweep(A_of, states, model.F, model.Q, Z, tight);
  double worst = 0.0, it_cnk = 0.0, it_nk = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto ind = nk_solve(A_of(states[k]), model.F, model.Q, Z);
    const auto ind_tight = nk_solve(A_of(states[k]), model.F, model.Q, Z, tight);
    worst = std::max(worst, (ind_tight.P - cas_tight[k].P).norm() / ind_tight.P.norm());
    it_cnk += cas[k].iterations;
    it_nk += ind.iterations;
    CHECK(cas[k].closed_loop_max_real_eig < 0.0);
  }
  it_cnk /= states.size();
  it_nk /= states.size();
  MESSAGE("mean iterations: cascade " << it_cnk << ", independent " << it_nk);
  CHECK(worst <= 1e-8);
  CHECK(it_nk == doctest::Approx(4.0).epsilon(0.25));
  CHECK(it_cnk <= 2.3);
  CHECK(it_cnk < it_nk);
}

TEST_CASE("cascade errors carry the failing index") {
  std::vector<Vec> states{Vec::Constant(1, -1.0), Vec::Constant(1, 5.0)};
  try {
    cnk_sweep([](const Vec& y) { return Mat::Constant(1, 1, y(0)); }, states, scalar(1), scalar(0),
              scalar(0));
    FAIL("expected failure at the second state");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("cascade index 1") != std::string::npos);
  }
  CHECK_THROWS_AS(cnk_sweep([](const Vec& y) { return Mat::Constant(1, 1, y(0)); }, {}, scalar(1),
                            scalar(0), scalar(0)),
                  Error);
}

TEST_CASE("feedback_gain") {
  std::mt19937 g(4);
  Mat B = oracle::randn(g, 6, 2), P = oracle::rand_sym(g, 6);
  CHECK(feedback_gain(Mat::Zero(6, 6), B, Mat::Identity(2, 2)).norm() == 0.0);
  CHECK((feedback_gain(P, Mat::Identity(6, 6), Mat::Identity(6, 6)) - P).norm() < 1e-14);
  Mat L = oracle::randn(g, 2, 2);
  Mat R = L * L.transpose() + Mat::Identity(2, 2);
  CHECK((R * feedback_gain(P, B, R) - B.transpose() * P).norm() < 1e-12);
  try {
    feedback_gain(P, B, -Mat::Identity(2, 2));
    FAIL("expected SingularR");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularR);
  }
}

TEST_CASE("oracle rejects a problem without stabilizing solution") {
  CHECK_THROWS_AS(hamiltonian_riccati_oracle(scalar(1), scalar(0), scalar(1)), Error);
}

TEST_CASE("solver names") {
  for (SolverKind s : {SolverKind::NK, SolverKind::CNK, SolverKind::Oracle})
    CHECK(solver_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(solver_from_string("lu"), Error);
}
