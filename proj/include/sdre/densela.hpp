#pragma once

#include <Eigen/Dense>
#include <utility>

#include "sdre/error.hpp"

namespace sdre {

// Column-major dense storage throughout.
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct SvdTruncation {
  Mat basis;
  Vec singular_values;
  int retained_rank = 0;
  double energy_fraction = 0.0;
};

// Solves A^T X + X A = M by Bartels-Stewart on the real Schur form of A.
// If max_real_eig is given it receives the spectral abscissa of A, which the
// Schur form provides at no extra cost.
Mat lyap_solve(const Mat& A, const Mat& M, double* max_real_eig = nullptr);

// Kronecker-vectorized dense LU solve of the same equation. n <= 64 only.
Mat lyap_solve_kron(const Mat& A, const Mat& M);

double logm_norm(const Mat& A);
double spectral_norm(const Mat& A);

// Smallest r with sum_{i<=r} s_i^2 / sum s_i^2 > tol.
SvdTruncation svd_truncate(const Mat& S, double tol);

// Thin QR with a positive diagonal in R.
std::pair<Mat, Mat> qr_retract(const Mat& M);

double eig_max_real(const Mat& A);

// Stabilizing ARE solution from the matrix sign function of the Hamiltonian.
Mat hamiltonian_riccati_oracle(const Mat& A, const Mat& F, const Mat& Q);

bool all_finite(const Mat& A);

}  // namespace sdre
