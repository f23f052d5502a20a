#include "llp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace llp {

namespace {

constexpr double kTwoOverPi = 0.63661977236758134308;

void check_qk(int q, int k, int lo, int hi) {
    if (q < 2 || k < lo || k > hi) throw std::invalid_argument("kappas: invalid (q, k)");
}

double kappa1_hom(int q, int k) {
    double t = 2.0 * k / q - 1.0;
    return t * t * kTwoOverPi;
}

double kappa2_hom(int q, int k) {
    double p = static_cast<double>(k) / q;
    return p * (1.0 - p) * 16.0 / (M_PI * (q - 1));
}

}  // namespace

double eta(int q, int k) {
    check_qk(q, k, 1, q - 1);
    return (2.0 * k / q - 1.0) * std::sqrt(kTwoOverPi);
}

KappaSet kappas_homogeneous(int q, int k, double lam_ratio) {
    check_qk(q, k, 1, q - 1);
    KappaSet s;
    s.kappa1 = kappa1_hom(q, k);
    s.kappa2 = kappa2_hom(q, k);
    s.kappa3 = s.kappa2 / (1.0 - s.kappa1);
    s.theta = 2.0 * lam_ratio *
              (1.0 / (2.0 - std::max(0.0, 2.0 * s.kappa1 - s.kappa2)) + 1.0 / (1.0 - s.kappa1));
    return s;
}

KappaSet kappas_offset(int q, int k, double ell, double lam_ratio) {
    check_qk(q, k, 1, q - 1);
    const double p = static_cast<double>(k) / q;
    const double phi = gaussian_pdf(ell);
    const double cdf = gaussian_cdf(ell);
    const double tail = gaussian_cdf(-ell);
    const double both = cdf * tail;
    const double big_m = phi * (p - tail) / both;
    KappaSet s;
    s.variant = KappaVariant::offset;
    s.ell = ell;
    s.kappa1 = big_m * big_m - ell * big_m;
    double ratio = phi / both;
    s.kappa2 = (2.0 / (q - 1)) * p * (1.0 - p) * ratio * ratio;
    s.kappa3 = s.kappa2 / ((1.0 - s.kappa1) * (1.0 - std::max(0.0, s.kappa1)));
    s.theta = 2.0 * lam_ratio *
              (1.0 / (2.0 - std::max(0.0, 2.0 * s.kappa1 - s.kappa2)) + 1.0 / (1.0 - std::max(0.0, s.kappa1)));
    return s;
}

KappaSet kappas_mixture(int q, const std::vector<double>& p, double lam_ratio) {
    if (q < 2 || static_cast<int>(p.size()) != q + 1) throw std::invalid_argument("kappas: p must have q + 1 entries");
    KappaSet s;
    s.variant = KappaVariant::mixture;
    double w = 0.0, k1 = 0.0, k2 = 0.0, k1_unweighted = 0.0;
    for (int k = 0; k <= q; ++k) {
        double pk2 = p[static_cast<std::size_t>(k)] * p[static_cast<std::size_t>(k)];
        w += pk2;
        k1 += pk2 * kappa1_hom(q, k);
        k2 += pk2 * kappa2_hom(q, k);
        k1_unweighted += kappa1_hom(q, k);
    }
    s.weight_sum = w;
    s.kappa1 = k1;
    s.kappa2 = k2;
    s.kappa3 = k2 / (w - k1);
    // The first denominator's max term uses the unweighted kappa1 sum.
    s.theta = 2.0 * lam_ratio * (1.0 / (2.0 * w - std::max(0.0, 2.0 * k1_unweighted - k2)) + 1.0 / (w - k1));
    return s;
}

double rho(const Vec& r, const Mat& sigma_b, const Mat& sigma_d) {
    if (!(r.norm() > 0.0)) throw std::invalid_argument("rho: zero direction");
    double den = r.dot(sigma_b * r);
    if (!(den > 0.0)) throw std::invalid_argument("rho: sigma_b is not positive definite along r");
    return r.dot(sigma_d * r) / den;
}

double rho_closed(double gamma, const KappaSet& kset) {
    double g2 = gamma * gamma;
    return 2.0 + g2 * kset.kappa2 / (kset.weight_sum - g2 * kset.kappa1);
}

double gamma_of(const Vec& r, const Vec& r_star, const Mat& sigma) {
    double a = r.dot(sigma * r);
    double b = r_star.dot(sigma * r_star);
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("gamma_of: zero direction");
    return std::clamp(r.dot(sigma * r_star) / (std::sqrt(a) * std::sqrt(b)), -1.0, 1.0);
}

double sample_complexity(Theorem which, const ComplexityParams& p) {
    if (!(p.d > 0 && p.eps > 0 && p.delta > 0 && p.q > 0 && p.lam_ratio > 0))
        throw std::invalid_argument("sample_complexity: parameters must be positive");
    const double log_term = std::log(p.d / p.delta);
    switch (which) {
        case Theorem::main1:
            return p.d / (p.eps * p.eps) * log_term;
        case Theorem::main2:
            return p.d / std::pow(p.eps, 4) * log_term * std::pow(p.lam_ratio, 6) * std::pow(p.q, 8);
        case Theorem::main3: {
            double phi_mass = gaussian_cdf(p.ell) * gaussian_cdf(-p.ell);
            double spread = (std::sqrt(p.lam_max) + p.mu_norm) / std::sqrt(p.lam_min);
            return p.d / std::pow(p.eps, 4) * (p.ell * p.ell / (phi_mass * phi_mass)) * log_term *
                   std::pow(p.lam_ratio, 4) * std::pow(spread, 4) * std::pow(p.q, 8);
        }
    }
    return 0.0;
}

double log_binomial_pmf(int n, double p, int r) {
    if (r < 0 || r > n) return -std::numeric_limits<double>::infinity();
    if (p == 0.0) return r == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (p == 1.0) return r == n ? 0.0 : -std::numeric_limits<double>::infinity();
    return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0) + r * std::log(p) +
           (n - r) * std::log1p(-p);
}

double prob_equal_binomials(int u, double p1, int v, double p2) {
    if (u < 0 || v < 0) throw std::invalid_argument("prob_equal_binomials: negative trial count");
    if (!(p1 >= 0 && p1 <= 1 && p2 >= 0 && p2 <= 1))
        throw std::invalid_argument("prob_equal_binomials: probabilities must lie in [0, 1]");
    double total = 0.0;
    for (int r = 0; r <= std::min(u, v); ++r)
        total += std::exp(log_binomial_pmf(u, p1, r) + log_binomial_pmf(v, p2, r));
    return total;
}

double p_star(double p1, double p2) {
    return std::min(std::max(p1, 1.0 - p1), std::max(p2, 1.0 - p2));
}

bool angle_bound_check(const Mat& a, const Mat& b, const Vec& r1, const Vec& r2, double eps1, double eps2) {
    EigenDecomposition ea = sym_eig(a);
    EigenDecomposition eb = sym_eig(b);
    double amax = ea.values[0];
    double amin = ea.values[ea.values.size() - 1];
    if (!(amin > 0.0) || !(eb.values[eb.values.size() - 1] > 0.0))
        throw std::invalid_argument("angle_bound_check: matrices must be positive definite");
    const double slack = 1e-12;
    double diff_norm = sym_eig(symmetrize(a - b)).values.cwiseAbs().maxCoeff();
    if (diff_norm > eps1 * amax * (1.0 + slack) + slack)
        throw std::invalid_argument("angle_bound_check: |A - B| exceeds eps1 |A|");
    if ((r1 - r2).norm() > eps2 * (1.0 + slack) + slack)
        throw std::invalid_argument("angle_bound_check: |r1 - r2| exceeds eps2");
    double cond = amax / amin;
    if (cond * (eps1 + eps2) > 0.5) throw std::invalid_argument("angle_bound_check: perturbation too large");
    Vec x = a * r1;
    Vec y = b * r2;
    double lhs = (x / x.norm() - y / y.norm()).norm();
    return lhs <= 4.0 * cond * (eps1 + eps2);
}

}  // namespace llp
