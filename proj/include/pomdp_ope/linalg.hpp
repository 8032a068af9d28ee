#pragma once

#include <limits>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "pomdp_ope/common.hpp"

namespace pomdp_ope {

/// Relative singular-value cutoff for Moore-Penrose inverses.
inline constexpr double kPinvRtol = 1e-10;
/// Relative cutoff for numerical rank decisions.
inline constexpr double kRankRtol = 1e-8;

struct SvdSummary {
  int rank = 0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;  // smallest singular value overall
};

/// Moore-Penrose pseudo-inverse via SVD, singular values below
/// rtol * sigma_max treated as zero. JacobiSVD throughout: the BDC
/// variant shipped with Eigen 3.4.0 miscomputes some wide matrices.
inline Mat pinv(const Mat& m, double rtol = kPinvRtol) {
  if (m.size() == 0) return Mat(m.cols(), m.rows());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  double cutoff = sv.size() > 0 ? rtol * sv(0) : 0.0;
  Vec inv_sv = Vec::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) inv_sv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

inline SvdSummary svd_rank(const Mat& m, double rtol = kRankRtol) {
  SvdSummary out;
  if (m.size() == 0) return out;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& sv = svd.singularValues();
  out.sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  out.sigma_min = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
  double cutoff = rtol * out.sigma_max;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++out.rank;
  return out;
}

/// Dense solve with partial-pivot LU; verifies the residual so that a
/// silently singular system surfaces as an error.
inline Vec solve_checked(const Mat& a, const Vec& b, double residual_tol = 1e-8) {
  Vec x = a.partialPivLu().solve(b);
  double scale = b.norm() + a.norm() * x.norm() + 1.0;
  double residual = (a * x - b).norm() / scale;
  if (!x.allFinite() || residual > residual_tol)
    throw NumericError("linear solve residual " + std::to_string(residual) +
                       " exceeds tolerance");
  return x;
}

/**
 * sup_x (x' N x) / (x' D x) over x with x' D x != 0, for symmetric PSD N, D.
 *
 * The sup is taken on the column space of D (kernel directions of D are
 * projected out first). Returns +infinity when N has mass on ker(D),
 * i.e. the ratio is unbounded.
 */
inline double rayleigh_sup(const Mat& n, const Mat& d, double rtol = kRankRtol) {
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (d + d.transpose()));
  const Vec& ev = es.eigenvalues();
  double emax = ev.size() > 0 ? ev(ev.size() - 1) : 0.0;
  double cutoff = rtol * std::max(emax, 0.0);
  int dim = static_cast<int>(ev.size());

  int rank = 0;
  for (int i = 0; i < dim; ++i)
    if (ev(i) > cutoff) ++rank;
  if (rank == 0) return inf;

  Mat range(dim, rank);
  Vec inv_sqrt(rank);
  int k = 0;
  for (int i = 0; i < dim; ++i) {
    if (ev(i) > cutoff) {
      range.col(k) = es.eigenvectors().col(i);
      inv_sqrt(k) = 1.0 / std::sqrt(ev(i));
      ++k;
    }
  }

  // Unbounded iff N acts nontrivially on ker(D); for PSD N this is
  // equivalent to N v != 0 for some kernel vector v.
  double nscale = n.cwiseAbs().maxCoeff();
  if (rank < dim && nscale > 0.0) {
    for (int i = 0; i < dim; ++i) {
      if (ev(i) <= cutoff) {
        Vec v = es.eigenvectors().col(i);
        if ((n * v).cwiseAbs().maxCoeff() > rtol * nscale) return inf;
      }
    }
  }

  Mat w = inv_sqrt.asDiagonal() * range.transpose() * n * range * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es2(0.5 * (w + w.transpose()));
  double top = es2.eigenvalues()(es2.eigenvalues().size() - 1);
  return top < 0.0 ? 0.0 : top;
}

}  // namespace pomdp_ope
