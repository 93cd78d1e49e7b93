#include "infogeo/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "infogeo/errors.hpp"

namespace infogeo {

Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

double asymmetry(const Mat& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

SymEig sym_eig(const Mat& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("sym_eig: matrix is not square");
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a));
  if (es.info() != Eigen::Success) throw NumericalFailure("self-adjoint eigen-decomposition did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("self-adjoint eigen-decomposition did not converge");
  return es.eigenvalues()(0);
}

double max_eigenvalue(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("self-adjoint eigen-decomposition did not converge");
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double spectral_norm_sym(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("self-adjoint eigen-decomposition did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_positive_definite(const Mat& a) {
  if (a.rows() != a.cols() || a.size() == 0) return false;
  if (!a.allFinite() || asymmetry(a) > kSymTol) return false;
  return min_eigenvalue(a) > 0.0;
}

bool psd_leq(const Mat& a, const Mat& b, double tol) { return min_eigenvalue(b - a) >= -tol; }

void require_spd(const Mat& a, const char* what) {
  if (a.rows() != a.cols() || a.size() == 0)
    throw NotPositiveDefinite(std::string(what) + ": matrix is not square");
  if (!a.allFinite()) throw NotPositiveDefinite(std::string(what) + ": non-finite entries");
  if (asymmetry(a) > kSymTol) throw NotPositiveDefinite(std::string(what) + ": matrix is not symmetric");
  if (!(min_eigenvalue(a) > 0.0)) throw NotPositiveDefinite(std::string(what) + ": matrix is not positive definite");
}

Mat sym_sqrt(const Mat& a) {
  const SymEig e = sym_eig(a);
  if (!(e.values(0) > 0.0)) throw NotPositiveDefinite("sym_sqrt: matrix is not positive definite");
  return e.vectors * e.values.cwiseSqrt().asDiagonal() * e.vectors.transpose();
}

Mat sym_inv_sqrt(const Mat& a) {
  const SymEig e = sym_eig(a);
  if (!(e.values(0) > 0.0)) throw NotPositiveDefinite("sym_inv_sqrt: matrix is not positive definite");
  return e.vectors * e.values.cwiseSqrt().cwiseInverse().asDiagonal() * e.vectors.transpose();
}

Mat spd_inverse(const Mat& a) {
  Eigen::LLT<Mat> llt(symmetrize(a));
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("spd_inverse: matrix is not positive definite");
  return symmetrize(llt.solve(Mat::Identity(a.rows(), a.cols())));
}

double log_det_spd(const Mat& a) {
  const SymEig e = sym_eig(a);
  if (!(e.values(0) > 0.0)) throw NotPositiveDefinite("log_det: matrix is not positive definite");
  return e.values.array().log().sum();
}

}  // namespace infogeo
