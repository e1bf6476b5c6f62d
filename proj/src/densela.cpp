#include "sdre/densela.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <vector>

namespace sdre {

namespace {

void require_square(const Mat& A, const char* who) {
  if (A.rows() != A.cols())
    throw Error(ErrorKind::DimensionMismatch, std::string(who) + ": matrix is not square");
}

struct Block {
  Eigen::Index start;
  Eigen::Index size;
};

std::vector<Block> schur_blocks(const Mat& T) {
  std::vector<Block> blocks;
  const Eigen::Index n = T.rows();
  Eigen::Index i = 0;
  while (i < n) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      blocks.push_back({i, 2});
      i += 2;
    } else {
      blocks.push_back({i, 1});
      i += 1;
    }
  }
  return blocks;
}

using Small = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

// Solves T_ii^T Y + Y T_jj = rhs for blocks of size <= 2.
Small small_sylvester(const Small& Tii, const Small& Tjj, const Small& rhs, double scale) {
  const Eigen::Index si = Tii.rows(), sj = Tjj.rows();
  const Eigen::Index k = si * sj;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4> K(k, k);
  K.setZero();
  for (Eigen::Index a = 0; a < sj; ++a)
    for (Eigen::Index b = 0; b < sj; ++b)
      for (Eigen::Index c = 0; c < si; ++c)
        for (Eigen::Index d = 0; d < si; ++d)
          K(a * si + c, b * si + d) = (a == b ? Tii(d, c) : 0.0) + (c == d ? Tjj(b, a) : 0.0);
  Eigen::FullPivLU<decltype(K)> lu(K);
  const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (pivot <= 1e3 * std::numeric_limits<double>::epsilon() * scale)
    throw Error(ErrorKind::SingularLyapunov, "eigenvalue pair sums to zero");
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1> v(k);
  for (Eigen::Index b = 0; b < sj; ++b)
    for (Eigen::Index a = 0; a < si; ++a) v(b * si + a) = rhs(a, b);
  const Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1> x = lu.solve(v);
  Small out(si, sj);
  for (Eigen::Index b = 0; b < sj; ++b)
    for (Eigen::Index a = 0; a < si; ++a) out(a, b) = x(b * si + a);
  return out;
}

}  // namespace

bool all_finite(const Mat& A) { return A.allFinite(); }

Mat lyap_solve(const Mat& A, const Mat& M, double* max_real_eig) {
  require_square(A, "lyap_solve");
  if (M.rows() != A.rows() || M.cols() != A.cols())
    throw Error(ErrorKind::DimensionMismatch, "lyap_solve: A and M differ in size");
  const Eigen::Index n = A.rows();
  if (n == 0) return Mat(0, 0);

  Eigen::RealSchur<Mat> schur(A, true);
  if (schur.info() != Eigen::Success)
    throw Error(ErrorKind::SingularLyapunov, "real Schur iteration failed");
  const Mat& T = schur.matrixT();
  const Mat& U = schur.matrixU();
  const std::vector<Block> blocks = schur_blocks(T);

  if (max_real_eig) {
    double m = -std::numeric_limits<double>::infinity();
    for (const Block& b : blocks) {
      const double re = b.size == 1 ? T(b.start, b.start)
                                    : 0.5 * (T(b.start, b.start) + T(b.start + 1, b.start + 1));
      m = std::max(m, re);
    }
    *max_real_eig = m;
  }

  const double mnorm = M.norm();
  if (mnorm == 0.0) return Mat::Zero(n, n);

  const double scale = std::max(T.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const Mat C = U.transpose() * M * U;
  Mat Y = Mat::Zero(n, n);
  Mat rhs;
  for (const Block& bj : blocks) {
    rhs = C.middleCols(bj.start, bj.size);
    if (bj.start > 0)
      rhs.noalias() -= Y.leftCols(bj.start) * T.block(0, bj.start, bj.start, bj.size);
    // forward substitution with T^T (lower quasi-triangular) down the rows
    for (const Block& bi : blocks) {
      const Eigen::Index i0 = bi.start;
      if (bi.size == 1 && bj.size == 1) {
        const double acc = rhs(i0, 0) - T.col(i0).head(i0).dot(Y.col(bj.start).head(i0));
        const double d = T(i0, i0) + T(bj.start, bj.start);
        if (std::abs(d) <= 1e3 * std::numeric_limits<double>::epsilon() * scale)
          throw Error(ErrorKind::SingularLyapunov, "eigenvalue pair sums to zero");
        Y(i0, bj.start) = acc / d;
        continue;
      }
      Small r = rhs.middleRows(i0, bi.size);
      for (Eigen::Index a = 0; a < bi.size; ++a)
        for (Eigen::Index b = 0; b < bj.size; ++b)
          r(a, b) -= T.col(i0 + a).head(i0).dot(Y.col(bj.start + b).head(i0));
      Y.block(i0, bj.start, bi.size, bj.size) =
          small_sylvester(T.block(i0, i0, bi.size, bi.size),
                          T.block(bj.start, bj.start, bj.size, bj.size), r, scale);
    }
  }
  Mat X = U * Y * U.transpose();
  if ((M - M.transpose()).norm() <= 1e-12 * mnorm) X = 0.5 * (X + X.transpose()).eval();
  if (!X.allFinite()) throw Error(ErrorKind::SingularLyapunov, "non-finite solution");
  const double res = (A.transpose() * X + X * A - M).norm() / mnorm;
  if (res > 1e-8)
    throw Error(ErrorKind::SingularLyapunov,
                "relative residual " + std::to_string(res) + " after Bartels-Stewart");
  return X;
}

Mat lyap_solve_kron(const Mat& A, const Mat& M) {
  require_square(A, "lyap_solve_kron");
  if (M.rows() != A.rows() || M.cols() != A.cols())
    throw Error(ErrorKind::DimensionMismatch, "lyap_solve_kron: A and M differ in size");
  const Eigen::Index n = A.rows();
  if (n > 64) throw Error(ErrorKind::DimensionMismatch, "Kronecker solve limited to n <= 64");
  const Mat At = A.transpose();
  Mat K = Mat::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    K.block(j * n, j * n, n, n) += At;
    for (Eigen::Index l = 0; l < n; ++l)
      K.block(j * n, l * n, n, n).diagonal().array() += At(j, l);
  }
  Eigen::PartialPivLU<Mat> lu(K);
  Vec x = lu.solve(Eigen::Map<const Vec>(M.data(), n * n));
  if (!x.allFinite()) throw Error(ErrorKind::SingularLyapunov, "Kronecker system is singular");
  return Eigen::Map<Mat>(x.data(), n, n);
}

double logm_norm(const Mat& A) {
  require_square(A, "logm_norm");
  const Mat S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double spectral_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(A);
  return svd.singularValues()(0);
}

SvdTruncation svd_truncate(const Mat& S, double tol) {
  if (!(tol > 0.0 && tol < 1.0))
    throw Error(ErrorKind::InvalidTolerance, "tolerance must lie in (0,1)");
  if (S.size() == 0 || S.norm() == 0.0) throw Error(ErrorKind::ZeroMatrix, "svd_truncate");
  Eigen::BDCSVD<Mat> svd(S, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  const double total = s.squaredNorm();
  double acc = 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    acc += s(i) * s(i);
    r = static_cast<int>(i) + 1;
    if (acc / total > tol) break;
  }
  SvdTruncation out;
  out.basis = svd.matrixU().leftCols(r);
  out.singular_values = s;
  out.retained_rank = r;
  out.energy_fraction = acc / total;
  return out;
}

std::pair<Mat, Mat> qr_retract(const Mat& M) {
  const Eigen::Index n = M.rows(), r = M.cols();
  if (r > n) throw Error(ErrorKind::DimensionMismatch, "qr_retract: matrix is wide");
  Eigen::HouseholderQR<Mat> qr(M);
  Mat Q = qr.householderQ() * Mat::Identity(n, r);
  Mat R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const double mnorm = M.norm();
  for (Eigen::Index i = 0; i < r; ++i) {
    if (std::abs(R(i, i)) < 1e-13 * mnorm || mnorm == 0.0)
      throw Error(ErrorKind::RankDeficient, "qr_retract: column " + std::to_string(i));
    if (R(i, i) < 0) {
      R.row(i) *= -1.0;
      Q.col(i) *= -1.0;
    }
  }
  return {Q, R};
}

double eig_max_real(const Mat& A) {
  require_square(A, "eig_max_real");
  if (A.rows() == 0) throw Error(ErrorKind::DimensionMismatch, "eig_max_real: empty matrix");
  Eigen::RealSchur<Mat> schur(A, false);
  if (schur.info() != Eigen::Success)
    throw Error(ErrorKind::NonConvergence, "eigenvalue iteration failed");
  const Mat& T = schur.matrixT();
  double m = -std::numeric_limits<double>::infinity();
  for (const Block& b : schur_blocks(T)) {
    const double re = b.size == 1 ? T(b.start, b.start)
                                  : 0.5 * (T(b.start, b.start) + T(b.start + 1, b.start + 1));
    m = std::max(m, re);
  }
  if (!std::isfinite(m)) throw Error(ErrorKind::NonConvergence, "non-finite eigenvalue");
  return m;
}

Mat hamiltonian_riccati_oracle(const Mat& A, const Mat& F, const Mat& Q) {
  require_square(A, "hamiltonian_riccati_oracle");
  const Eigen::Index n = A.rows();
  if (F.rows() != n || F.cols() != n || Q.rows() != n || Q.cols() != n)
    throw Error(ErrorKind::DimensionMismatch, "hamiltonian_riccati_oracle");
  Mat Z(2 * n, 2 * n);
  Z << A, -F, -Q, -A.transpose();

  // Newton iteration for sign(H) with determinant scaling.
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    Eigen::PartialPivLU<Mat> lu(Z);
    const Mat Zi = lu.inverse();
    if (!Zi.allFinite())
      throw Error(ErrorKind::NoStabilizingSolution, "Hamiltonian has eigenvalues on the axis");
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < 2 * n; ++i) logdet += std::log(std::abs(lu.matrixLU()(i, i)));
    double c = std::exp(-logdet / static_cast<double>(2 * n));
    if (!std::isfinite(c) || it > 20) c = 1.0;
    Mat Zn = 0.5 * (c * Z + Zi / c);
    const double change = (Zn - Z).lpNorm<1>();
    Z = std::move(Zn);
    if (change <= 1e-13 * Z.lpNorm<1>()) {
      converged = true;
      break;
    }
  }
  if (!converged) throw Error(ErrorKind::NoStabilizingSolution, "sign iteration stalled");
  if (std::abs(Z.trace()) > 0.5)
    throw Error(ErrorKind::NoStabilizingSolution, "stable subspace has the wrong dimension");

  Mat lhs(2 * n, n), rhs(2 * n, n);
  lhs << Z.topRightCorner(n, n), Z.bottomRightCorner(n, n) + Mat::Identity(n, n);
  rhs << Z.topLeftCorner(n, n) + Mat::Identity(n, n), Z.bottomLeftCorner(n, n);
  Eigen::ColPivHouseholderQR<Mat> qr(lhs);
  if (qr.rank() < n) throw Error(ErrorKind::NoStabilizingSolution, "subspace basis is singular");
  Mat P = -qr.solve(rhs);
  P = 0.5 * (P + P.transpose()).eval();
  if (!P.allFinite()) throw Error(ErrorKind::NoStabilizingSolution, "non-finite solution");
  return P;
}

}  // namespace sdre
