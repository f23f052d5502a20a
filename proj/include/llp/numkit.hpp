#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "llp/rng.hpp"

namespace llp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when a matrix that must be positive definite is not (numerically).
class NotPositiveDefinite : public std::runtime_error {
  public:
    explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

enum class Side { above, below };

double gaussian_pdf(double x);
double gaussian_cdf(double x);
/// Inverse of gaussian_cdf on (0, 1).
double gaussian_quantile(double p);

/// phi(x) / (1 - Phi(x)), stable for large positive x.
double gaussian_hazard(double x);

/// Mean of a standard normal conditioned on z > ell (above) or z <= ell (below).
double trunc_normal_mean(double ell, Side side);
double trunc_normal_second_moment(double ell, Side side);
double trunc_normal_variance(double ell, Side side);

double sample_std_normal(RngStream& rng);
/// Draw z ~ N(0,1) conditioned on z > ell (above) or z < ell (below).
double sample_trunc_normal(RngStream& rng, double ell, Side side);

struct EigenDecomposition {
    Vec values;   // descending
    Mat vectors;  // column i pairs with values[i]
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Each eigenvector is signed so that its first entry of largest absolute
/// value is non-negative.  Throws std::invalid_argument if `m` is not square
/// or not symmetric to within 1e-12 relative.
EigenDecomposition sym_eig(const Mat& m);

Vec principal_eigenvector(const Mat& m);

/// Symmetric inverse square root.  Throws NotPositiveDefinite if any
/// eigenvalue is <= tol * lambda_max.
Mat inv_sqrt_psd(const Mat& m, double tol = 1e-10);

/// Symmetric square root of a PSD matrix (negative rounding noise clamped to 0).
Mat sqrt_psd(const Mat& m);

/// min(|a - b|, |a + b|) for unit vectors.
double angle_min_dist(const Vec& a, const Vec& b);

/// (m + m^T) / 2.
Mat symmetrize(const Mat& m);

}  // namespace llp
