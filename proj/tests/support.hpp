#pragma once

// Test-side oracles kept independent of the library's closed forms.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "llp/numkit.hpp"
#include "llp/rng.hpp"

namespace testsupport {

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double eps, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, eps / 2, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, eps / 2, depth - 1);
}

/// Adaptive Simpson quadrature on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, double eps = 1e-13) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, eps, 50);
}

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

/// E[Z^power | Z > ell] (above) or | Z < ell (below) by quadrature, truncating
/// the infinite end 40 units away.
inline double trunc_moment_quad(double ell, bool above, int power) {
    auto g0 = [](double z) { return phi(z); };
    auto gp = [power](double z) { return std::pow(z, power) * phi(z); };
    double a = above ? ell : ell - 40.0;
    double num = 0.0, den = 0.0;
    // unit panels so the adaptive rule can't stop early on a flat far tail
    for (int i = 0; i < 40; ++i) {
        num += integrate(gp, a + i, a + i + 1, 1e-16);
        den += integrate(g0, a + i, a + i + 1, 1e-16);
    }
    return num / den;
}

/// Phi by quadrature of the density from -40.
inline double cdf_quad(double x) {
    double s = 0.0;
    double a = -40.0;
    for (; a + 1.0 < x; a += 1.0) s += integrate(phi, a, a + 1.0, 1e-17);
    return s + integrate(phi, a, x, 1e-17);
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a cdf.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        dmax = std::max(dmax, std::max(f - i / n, (i + 1) / n - f));
    }
    return dmax;
}

/// Asymptotic KS critical value at level alpha = 1e-3: c(alpha)/sqrt(n),
/// c = sqrt(-ln(alpha/2)/2).
inline double ks_critical_1e3(std::size_t n) {
    return std::sqrt(-0.5 * std::log(0.5e-3)) / std::sqrt(static_cast<double>(n));
}

inline llp::Vec random_unit(int d, llp::RngStream& rng) {
    llp::Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
    return v / v.norm();
}

/// Random SPD matrix with eigenvalues in [lo, hi] and a random eigenbasis.
inline llp::Mat random_spd(int d, llp::RngStream& rng, double lo = 0.25, double hi = 4.0) {
    llp::Mat g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<llp::Mat> qr(g);
    llp::Mat q = qr.householderQ();
    llp::Vec lam(d);
    for (int i = 0; i < d; ++i) lam[i] = lo + (hi - lo) * rng.uniform();
    llp::Mat s = q * lam.asDiagonal() * q.transpose();
    return 0.5 * (s + s.transpose());
}

inline llp::Mat random_symmetric(int d, llp::RngStream& rng) {
    llp::Mat g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
    return 0.5 * (g + g.transpose());
}

struct MeanStd {
    double mean = 0.0;
    double sd = 0.0;
    double stderr_ = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd r;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) r.mean += x;
    r.mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(ss / (n - 1.0));
    r.stderr_ = r.sd / std::sqrt(n);
    return r;
}

}  // namespace testsupport
