#include "llp/estimators.hpp"

#include <stdexcept>

namespace llp {

namespace {

std::uint64_t checked_q(const BagSource& src) {
    if (src.q() < 2) throw std::invalid_argument("estimator: bags must hold at least 2 instances");
    return static_cast<std::uint64_t>(src.q());
}

}  // namespace

const char* estimator_mode_name(EstimatorMode mode) {
    return mode == EstimatorMode::one_per_bag ? "one_per_bag" : "all_instances";
}

EstimatorMode parse_estimator_mode(const std::string& s) {
    if (s == "one_per_bag") return EstimatorMode::one_per_bag;
    if (s == "all_instances") return EstimatorMode::all_instances;
    throw std::invalid_argument("unknown estimator '" + s + "' (expected one_per_bag or all_instances)");
}

Vec estimate_bag_mean(BagSource& src, std::size_t m, RngStream& rng, EstimatorMode mode) {
    if (m < 1) throw std::invalid_argument("estimate_bag_mean: m must be positive");
    const std::uint64_t q = checked_q(src);
    Vec sum = Vec::Zero(src.dim());
    for (std::size_t i = 0; i < m; ++i) {
        Bag b = src.next(rng);
        if (mode == EstimatorMode::all_instances)
            sum += b.x.colwise().sum().transpose() / static_cast<double>(q);
        else
            sum += b.x.row(static_cast<Eigen::Index>(rng.uniform_index(q))).transpose();
    }
    return sum / static_cast<double>(m);
}

MomentEstimates bag_moments_all(const std::vector<Bag>& bags) {
    if (bags.size() < 2) throw std::invalid_argument("bag_moments_all: need at least 2 bags");
    const int q = bags.front().q();
    const int d = bags.front().dim();
    if (q < 2) throw std::invalid_argument("bag_moments_all: bags must hold at least 2 instances");
    Vec sum = Vec::Zero(d);
    Mat second = Mat::Zero(d, d);
    Mat pair = Mat::Zero(d, d);
    for (const Bag& b : bags) {
        if (b.q() != q || b.dim() != d) throw std::invalid_argument("bag_moments_all: bags differ in shape");
        Vec s = b.x.colwise().sum().transpose();
        Mat s2 = b.x.transpose() * b.x;
        sum += s;
        second += s2;
        // sum over i != j of (x_i - x_j)(x_i - x_j)^T = 2q S2 - 2 s s^T
        pair += (2.0 * q) * s2 - 2.0 * s * s.transpose();
    }
    const double n = static_cast<double>(bags.size()) * q;
    MomentEstimates out;
    out.m = bags.size();
    out.mu_b = sum / n;
    out.sigma_b = symmetrize(second / n - out.mu_b * out.mu_b.transpose());
    out.sigma_d = symmetrize(pair / (static_cast<double>(bags.size()) * q * (q - 1)));
    return out;
}

MomentEstimates estimate_moments(BagSource& src, std::size_t m, RngStream& rng, EstimatorMode mode) {
    if (mode == EstimatorMode::one_per_bag) return mean_covs_estimator(src, m, rng);
    if (m < 2) throw std::invalid_argument("estimate_moments: m must be at least 2");
    return bag_moments_all(sample_bags(src, m, rng));
}

MomentEstimates mean_covs_estimator(BagSource& src, std::size_t m, RngStream& rng) {
    if (m < 2) throw std::invalid_argument("mean_covs_estimator: m must be at least 2");
    const std::uint64_t q = checked_q(src);
    const int d = src.dim();
    const auto md = static_cast<double>(m);

    Mat picks(static_cast<Eigen::Index>(m), d);
    for (std::size_t i = 0; i < m; ++i) {
        Bag b = src.next(rng);
        picks.row(static_cast<Eigen::Index>(i)) = b.x.row(static_cast<Eigen::Index>(rng.uniform_index(q)));
    }
    MomentEstimates out;
    out.m = m;
    out.mu_b = picks.colwise().sum().transpose() / md;
    Mat centered = picks.rowwise() - out.mu_b.transpose();
    out.sigma_b = symmetrize(centered.transpose() * centered / md);

    Mat diffs(static_cast<Eigen::Index>(m), d);
    for (std::size_t i = 0; i < m; ++i) {
        Bag b = src.next(rng);
        auto a = static_cast<Eigen::Index>(rng.uniform_index(q));
        auto c = static_cast<Eigen::Index>(rng.uniform_index(q - 1));
        if (c >= a) ++c;
        diffs.row(static_cast<Eigen::Index>(i)) = b.x.row(a) - b.x.row(c);
    }
    out.sigma_d = symmetrize(diffs.transpose() * diffs / md);
    return out;
}

MomentEstimates mean_covs_estimator(const OracleConfig& cfg, std::size_t m, RngStream& rng) {
    BagOracle oracle(cfg);
    return mean_covs_estimator(oracle, m, rng);
}

ClassMoments class_conditional_moments(const GaussianSpec& dist, const LTF& target, int label) {
    Normalization n = normalize_ltf(target, dist);
    Side side = label == 1 ? Side::above : Side::below;
    double mean = trunc_normal_mean(n.ell, side);
    double var = trunc_normal_variance(n.ell, side);
    Vec gu = dist.gamma() * n.u_star;
    ClassMoments cm;
    cm.mean = dist.mu() + mean * gu;
    cm.cov = symmetrize(dist.sigma() + (var - 1.0) * gu * gu.transpose());
    return cm;
}

PopulationMoments closed_form_moments(const GaussianSpec& dist, const LTF& target, int q, int k) {
    if (q < 2 || k < 0 || k > q) throw std::invalid_argument("closed_form_moments: need q >= 2 and 0 <= k <= q");
    ClassMoments pos1 = class_conditional_moments(dist, target, 1);
    ClassMoments neg0 = class_conditional_moments(dist, target, 0);
    const double p = static_cast<double>(k) / q;
    PopulationMoments pm;
    pm.delta = pos1.mean - neg0.mean;
    pm.mu_b = p * pos1.mean + (1.0 - p) * neg0.mean;
    Mat dd = pm.delta * pm.delta.transpose();
    pm.sigma_b = symmetrize(p * pos1.cov + (1.0 - p) * neg0.cov + p * (1.0 - p) * dd);
    pm.sigma_d = symmetrize(2.0 * pm.sigma_b + (2.0 / (q - 1)) * p * (1.0 - p) * dd);
    return pm;
}

MixtureMoments mixture_closed_form_moments(const GaussianSpec& dist, const LTF& target, int q,
                                           const std::vector<double>& p) {
    if (q < 2 || static_cast<int>(p.size()) != q + 1)
        throw std::invalid_argument("mixture_closed_form_moments: p must have q + 1 entries");
    const int d = dist.dim();
    MixtureMoments mm{Mat::Zero(d, d), Mat::Zero(d, d)};
    for (int k = 0; k <= q; ++k) {
        double w = p[static_cast<std::size_t>(k)];
        if (w == 0.0) continue;
        PopulationMoments pm = closed_form_moments(dist, target, q, k);
        mm.sigma_b += w * w * pm.sigma_b;
        mm.sigma_d += w * w * pm.sigma_d;
    }
    return mm;
}

}  // namespace llp
