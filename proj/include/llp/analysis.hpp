#pragma once

#include <vector>

#include "llp/numkit.hpp"

namespace llp {

/// (2k/q - 1) sqrt(2/pi): the bag mean along r* under N(0, I).
double eta(int q, int k);

enum class KappaVariant { homogeneous, offset, mixture };

struct KappaSet {
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double kappa3 = 0.0;
    double theta = 0.0;
    KappaVariant variant = KappaVariant::homogeneous;
    double ell = 0.0;         // offset variant
    double weight_sum = 1.0;  // mixture: sum of p_k^2; otherwise 1
};

/// lam_ratio = lambda_max / lambda_min, used only for theta.
KappaSet kappas_homogeneous(int q, int k, double lam_ratio = 1.0);
KappaSet kappas_offset(int q, int k, double ell, double lam_ratio = 1.0);
/// kappa1 and kappa2 hold the p_k^2-weighted sums over k = 0..q.
KappaSet kappas_mixture(int q, const std::vector<double>& p, double lam_ratio = 1.0);

/// r^T sigma_d r / r^T sigma_b r.
double rho(const Vec& r, const Mat& sigma_b, const Mat& sigma_d);
/// 2 + gamma^2 kappa2 / (W - gamma^2 kappa1), W = kset.weight_sum.
double rho_closed(double gamma, const KappaSet& kset);
/// r^T Sigma r* / (sqrt(r^T Sigma r) sqrt(r*^T Sigma r*)).
double gamma_of(const Vec& r, const Vec& r_star, const Mat& sigma);

enum class Theorem { main1, main2, main3 };

struct ComplexityParams {
    double d = 1;
    double eps = 0.1;
    double delta = 0.1;
    double q = 2;
    double lam_ratio = 1.0;   // lambda_max / lambda_min
    double lam_max = 1.0;     // main3 only
    double lam_min = 1.0;     // main3 only
    double ell = 0.0;         // main3 only
    double mu_norm = 0.0;     // main3 only
};

/// Sample-size bound with every hidden constant set to 1.  Only ratios of
/// these values are meaningful.
double sample_complexity(Theorem which, const ComplexityParams& p);

/// log of the Binomial(n, p) pmf at r; -inf where the mass is zero.
double log_binomial_pmf(int n, double p, int r);

/// Pr[X1 = X2] for independent X1 ~ Bin(u, p1), X2 ~ Bin(v, p2).
double prob_equal_binomials(int u, double p1, int v, double p2);

/// min(max(p1, 1 - p1), max(p2, 1 - p2)).
double p_star(double p1, double p2);

/// Checks |A r1/|A r1| - B r2/|B r2|| <= 4 (lmax(A)/lmin(A)) (eps1 + eps2).
/// Throws std::invalid_argument unless A, B are PD, |A - B| <= eps1 |A|,
/// |r1 - r2| <= eps2 and (lmax(A)/lmin(A)) (eps1 + eps2) <= 1/2.
bool angle_bound_check(const Mat& a, const Mat& b, const Vec& r1, const Vec& r2, double eps1, double eps2);

}  // namespace llp
