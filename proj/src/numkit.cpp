#include "llp/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace llp {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kSqrt2Pi = 2.50662827463100050242;
constexpr double kSqrt1_2 = 0.70710678118654752440;

// Mills ratio (1 - Phi(x)) / phi(x) by its continued fraction, x large.
double mills_ratio_cf(double x) {
    // R(x) = 1 / (x + 1/(x + 2/(x + 3/(x + ...)))), modified Lentz.
    constexpr double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int n = 1; n < 500; ++n) {
        double a = n;
        d = x + a * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = x + a / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 / f;
}

double acklam_quantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double sample_above(RngStream& rng, double ell) {
    double mass = gaussian_cdf(-ell);
    if (mass >= 1e-6) {
        for (;;) {
            double x = -gaussian_quantile(rng.uniform_open() * mass);
            if (x > ell) return x;
        }
    }
    // Exponential-proposal rejection for the far tail.
    double alpha = 0.5 * (ell + std::sqrt(ell * ell + 4.0));
    for (;;) {
        double z = ell - std::log(rng.uniform_open()) / alpha;
        double g = z - alpha;
        if (rng.uniform() <= std::exp(-0.5 * g * g) && z > ell) return z;
    }
}

}  // namespace

double gaussian_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x * kSqrt1_2); }

double gaussian_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -HUGE_VAL;
        if (p == 1.0) return HUGE_VAL;
        throw std::invalid_argument("gaussian_quantile: p outside [0, 1]");
    }
    if (p > 0.5) return -gaussian_quantile(1.0 - p);
    double x = acklam_quantile(p);
    for (int i = 0; i < 2; ++i) {
        double e = gaussian_cdf(x) - p;
        double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
        x = x - u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double gaussian_hazard(double x) {
    if (x < 25.0) return gaussian_pdf(x) / gaussian_cdf(-x);
    return 1.0 / mills_ratio_cf(x);
}

double trunc_normal_mean(double ell, Side side) {
    return side == Side::above ? gaussian_hazard(ell) : -gaussian_hazard(-ell);
}

double trunc_normal_second_moment(double ell, Side side) {
    return side == Side::above ? 1.0 + ell * gaussian_hazard(ell)
                               : 1.0 - ell * gaussian_hazard(-ell);
}

double trunc_normal_variance(double ell, Side side) {
    // Above: 1 - h (h - ell); below mirrors with ell -> -ell.
    double l = side == Side::above ? ell : -ell;
    double h = gaussian_hazard(l);
    return 1.0 - h * (h - l);
}

double sample_std_normal(RngStream& rng) { return rng.normal(); }

double sample_trunc_normal(RngStream& rng, double ell, Side side) {
    if (!std::isfinite(ell)) throw std::invalid_argument("sample_trunc_normal: ell must be finite");
    return side == Side::above ? sample_above(rng, ell) : -sample_above(rng, -ell);
}

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

EigenDecomposition sym_eig(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw std::invalid_argument("sym_eig: matrix must be square and non-empty");
    const Eigen::Index n = m.rows();
    double scale = m.cwiseAbs().maxCoeff();
    if (!std::isfinite(scale)) throw std::invalid_argument("sym_eig: non-finite entries");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("sym_eig: matrix is not symmetric");

    Mat a = symmetrize(m);
    Mat v = Mat::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off <= 1e-32 * std::max(a.squaredNorm(), 1e-300)) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (apq == 0.0) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

    EigenDecomposition out{Vec(n), Mat(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index src = order[static_cast<std::size_t>(i)];
        out.values[i] = a(src, src);
        Vec col = v.col(src);
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (std::fabs(col[k]) > best) {
                best = std::fabs(col[k]);
                arg = k;
            }
        }
        if (col[arg] < 0) col = -col;
        out.vectors.col(i) = col;
    }
    return out;
}

Vec principal_eigenvector(const Mat& m) { return sym_eig(m).vectors.col(0); }

Mat inv_sqrt_psd(const Mat& m, double tol) {
    EigenDecomposition e = sym_eig(m);
    double lmax = e.values[0];
    Eigen::Index n = m.rows();
    if (!(lmax > 0.0) || e.values[n - 1] <= tol * lmax)
        throw NotPositiveDefinite("not positive definite");
    Vec s = e.values.cwiseSqrt().cwiseInverse();
    return symmetrize(e.vectors * s.asDiagonal() * e.vectors.transpose());
}

Mat sqrt_psd(const Mat& m) {
    EigenDecomposition e = sym_eig(m);
    Vec s = e.values.cwiseMax(0.0).cwiseSqrt();
    return symmetrize(e.vectors * s.asDiagonal() * e.vectors.transpose());
}

double angle_min_dist(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("angle_min_dist: dimension mismatch");
    if (std::fabs(a.norm() - 1.0) > 1e-9 || std::fabs(b.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("angle_min_dist: inputs must be unit vectors");
    return std::min((a - b).norm(), (a + b).norm());
}

}  // namespace llp
