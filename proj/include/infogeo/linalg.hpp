#pragma once

// Small symmetric-matrix helpers shared by all modules. Every decomposition
// symmetrizes its input first; floating-point drift otherwise breaks the
// symmetry assumptions of the self-adjoint solvers.

#include <Eigen/Dense>

namespace infogeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Max abs asymmetry admitted for a "symmetric" matrix.
inline constexpr double kSymTol = 1e-9;
/// Smallest eigenvalue >= -kPsdTol is admitted as PSD.
inline constexpr double kPsdTol = 1e-9;
/// Slack for cost comparisons.
inline constexpr double kCostTol = 1e-9;
/// Mean displacements shorter than this count as zero travel.
inline constexpr double kZeroTravel = 1e-12;

Mat symmetrize(const Mat& a);

/// max |a(i,j) - a(j,i)|
double asymmetry(const Mat& a);

struct SymEig {
  Vec values;   // ascending
  Mat vectors;  // columns
};

/// Eigen-decomposition of (a + aᵀ)/2. Throws NumericalFailure.
SymEig sym_eig(const Mat& a);

double min_eigenvalue(const Mat& a);
double max_eigenvalue(const Mat& a);

/// Largest singular value of a symmetric matrix (max |eigenvalue|).
double spectral_norm_sym(const Mat& a);

bool is_positive_definite(const Mat& a);

/// a ⪯ b + tol·I
bool psd_leq(const Mat& a, const Mat& b, double tol = kPsdTol);

/// Throws NotPositiveDefinite unless `a` is square, symmetric within kSymTol
/// and has a strictly positive smallest eigenvalue.
void require_spd(const Mat& a, const char* what);

/// Symmetric square root and inverse square root of an SPD matrix.
Mat sym_sqrt(const Mat& a);
Mat sym_inv_sqrt(const Mat& a);

/// Symmetric inverse of an SPD matrix.
Mat spd_inverse(const Mat& a);

double log_det_spd(const Mat& a);

}  // namespace infogeo
