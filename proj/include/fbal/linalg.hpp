#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>

namespace fbal {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

inline double operator_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

struct SvdSummary {
  Eigen::VectorXd singular_values;
  int rank = 0;
  double condition = 0.0;  // smallest / largest singular value
};

inline SvdSummary svd_summary(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  SvdSummary out;
  out.singular_values = svd.singularValues();
  const double smax = out.singular_values.size() ? out.singular_values(0) : 0.0;
  const double tol = smax * static_cast<double>(std::max(a.rows(), a.cols())) *
                     std::numeric_limits<double>::epsilon();
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i)
    if (out.singular_values(i) > tol) ++out.rank;
  out.condition =
      smax > 0.0 ? out.singular_values(out.singular_values.size() - 1) / smax : 0.0;
  return out;
}

inline double min_eigenvalue_hermitian(const Mat& a) {
  Mat h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Scaling-and-squaring matrix exponential with a truncated series core; the
// argument is scaled until its inf-norm is below 1/2, so 20 terms put the
// truncation error far below the 1e-11 target.
inline Mat expm(const Mat& a) {
  const Eigen::Index n = a.rows();
  double norm = 0.0;
  if (a.size() > 0) norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const Mat x = a / std::pow(2.0, squarings);
  Mat term = Mat::Identity(n, n);
  Mat sum = Mat::Identity(n, n);
  for (int k = 1; k <= 20; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace fbal
