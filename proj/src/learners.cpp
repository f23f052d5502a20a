#include "llp/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace llp {

namespace {

bool is_balanced(double k, int q) { return std::fabs(2.0 * k - q) < 1e-9; }

int target_for(const Bag& b, int k) { return k == kObservedCount ? b.observed_count : k; }

std::vector<Bag> fresh_bags(BagSource& src, std::size_t s, RngStream& rng) {
    return sample_bags(src, s, rng);
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::resolved: return "resolved";
        case Verdict::balanced_ambiguous: return "balanced-ambiguous";
        case Verdict::not_applicable: return "n/a";
    }
    return "?";
}

int positive_count(const LTF& h, const Bag& bag) {
    Vec proj = bag.x * h.r;
    int n = 0;
    for (Eigen::Index i = 0; i < proj.size(); ++i) n += pos(proj[i] + h.c);
    return n;
}

double bag_err_sample(const LTF& h, const std::vector<Bag>& bags, int k, int q) {
    if (bags.empty()) throw std::invalid_argument("bag_err_sample: no bags");
    std::size_t bad = 0;
    for (const Bag& b : bags) {
        if (b.q() != q) throw std::invalid_argument("bag_err_sample: bag size differs from q");
        if (positive_count(h, b) != target_for(b, k)) ++bad;
    }
    return static_cast<double>(bad) / static_cast<double>(bags.size());
}

Vec spectral_direction(const Mat& sigma_b, const Mat& sigma_d, double tol) {
    Mat w = inv_sqrt_psd(sigma_b, tol);
    Mat ratio = symmetrize(w * sigma_d * w);
    Vec r = w * principal_eigenvector(ratio);
    return r / r.norm();
}

LearnedHypothesis learn_mean_based(BagSource& src, std::size_t m, RngStream& rng, EstimatorMode mode) {
    const double k = src.nominal_k();
    const int q = src.q();
    if (is_balanced(k, q)) throw std::invalid_argument("balanced bags unsupported by mean-based learner");
    Vec mu = estimate_bag_mean(src, m, rng, mode);
    double n = mu.norm();
    if (!(n >= 1e-12)) throw std::runtime_error("degenerate mean");
    double sign = 2.0 * k / q - 1.0 > 0 ? 1.0 : -1.0;
    LearnedHypothesis out{LTF(sign * mu / n, 0.0), {}};
    out.meta.algorithm = "mean";
    out.meta.m = m;
    return out;
}

LearnedHypothesis learn_spectral_homogeneous(BagSource& src, std::size_t m, std::size_t s, RngStream& rng,
                                             EstimatorMode mode) {
    const int q = src.q();
    const bool balanced = is_balanced(src.nominal_k(), q);
    if (!balanced && s < 1) throw std::invalid_argument("learn_spectral_homogeneous: s must be positive");
    MomentEstimates est = estimate_moments(src, m, rng, mode);
    Vec r = spectral_direction(est.sigma_b, est.sigma_d);

    LearnedHypothesis out{LTF(r, 0.0), {}};
    out.meta.algorithm = "spectral";
    out.meta.m = m;
    if (balanced) {
        out.meta.verdict = Verdict::balanced_ambiguous;
        return out;
    }
    std::vector<Bag> sample = fresh_bags(src, s, rng);
    LTF minus(-r, 0.0);
    double e_plus = bag_err_sample(out.ltf, sample, kObservedCount, q);
    double e_minus = bag_err_sample(minus, sample, kObservedCount, q);
    out.meta.s = s;
    out.meta.verdict = Verdict::resolved;
    out.meta.candidate_bag_errors = {e_plus, e_minus};
    if (e_minus < e_plus) out.ltf = minus;
    return out;
}

OffsetChoice select_offset(const std::vector<Bag>& bags, const Vec& r, int k, int q) {
    if (bags.empty()) throw std::invalid_argument("select_offset: no bags");

    // Each bag contributes +1 at the (inclusive) left end of its satisfying
    // threshold interval and -1 at the (exclusive) right end.
    std::vector<std::pair<double, int>> events;
    events.reserve(2 * bags.size());
    std::size_t from_minus_inf = 0;
    std::vector<double> proj;
    for (const Bag& b : bags) {
        if (b.q() != q) throw std::invalid_argument("select_offset: bag size differs from q");
        int t = target_for(b, k);
        if (t < 0 || t > q) throw std::invalid_argument("select_offset: label count outside [0, q]");
        Vec pv = b.x * r;
        proj.assign(pv.data(), pv.data() + pv.size());
        std::sort(proj.begin(), proj.end(), std::greater<>());
        // proj[i] is the (i+1)-th largest.
        if (t == q) {
            ++from_minus_inf;
        } else {
            events.emplace_back(proj[static_cast<std::size_t>(t)], +1);
        }
        if (t > 0) events.emplace_back(proj[static_cast<std::size_t>(t - 1)], -1);
    }
    std::sort(events.begin(), events.end());

    // Candidate "below every event": only bags needing all positives count.
    std::size_t best = from_minus_inf;
    double best_tau = events.empty() ? 0.0 : events.front().first - 1.0;
    std::size_t best_cell_end = 0;  // index of the first event above the cell
    bool below_all = true;

    long long count = static_cast<long long>(from_minus_inf);
    std::size_t i = 0;
    while (i < events.size()) {
        double x = events[i].first;
        while (i < events.size() && events[i].first == x) count += events[i++].second;
        if (count >= 0 && static_cast<std::size_t>(count) >= best) {
            best = static_cast<std::size_t>(count);
            best_tau = x;
            best_cell_end = i;
            below_all = false;
        }
    }

    double tau;
    if (below_all) {
        tau = best_tau;
    } else if (best_cell_end < events.size()) {
        tau = 0.5 * (best_tau + events[best_cell_end].first);
    } else {
        tau = best_tau + 1.0;
    }
    OffsetChoice out;
    out.c_hat = -tau;
    out.satisfied = best;
    out.achieved_err = 1.0 - static_cast<double>(best) / static_cast<double>(bags.size());
    return out;
}

LearnedHypothesis learn_general(BagSource& src, std::size_t m, std::size_t s, RngStream& rng, EstimatorMode mode) {
    if (s < 1) throw std::invalid_argument("learn_general: s must be positive");
    const int q = src.q();
    const bool balanced = is_balanced(src.nominal_k(), q);
    MomentEstimates est = estimate_moments(src, m, rng, mode);
    Vec r = spectral_direction(est.sigma_b, est.sigma_d);
    std::vector<Bag> sample = fresh_bags(src, s, rng);

    OffsetChoice plus = select_offset(sample, r, kObservedCount, q);
    LearnedHypothesis out{LTF(r, plus.c_hat), {}};
    out.meta.algorithm = "general";
    out.meta.m = m;
    out.meta.s = s;
    out.meta.candidate_bag_errors = {plus.achieved_err};
    if (balanced) {
        out.meta.verdict = Verdict::balanced_ambiguous;
        return out;
    }
    OffsetChoice minus = select_offset(sample, -r, kObservedCount, q);
    out.meta.candidate_bag_errors.push_back(minus.achieved_err);
    out.meta.verdict = Verdict::resolved;
    if (minus.achieved_err < plus.achieved_err) out.ltf = LTF(-r, minus.c_hat);
    return out;
}

LearnedHypothesis best_of_candidates(const std::vector<Bag>& bags, const std::vector<LTF>& candidates, int k,
                                     int q) {
    if (candidates.empty()) throw std::invalid_argument("best_of_candidates: no candidates");
    LearnedHypothesis out{candidates.front(), {}};
    out.meta.algorithm = "random";
    double best = std::numeric_limits<double>::infinity();
    for (const LTF& h : candidates) {
        double e = bag_err_sample(h, bags, k, q);
        out.meta.candidate_bag_errors.push_back(e);
        if (e < best) {
            best = e;
            out.ltf = h;
        }
    }
    return out;
}

LearnedHypothesis random_ltf_baseline(const std::vector<Bag>& bags, int trials, int k, int q, RngStream& rng,
                                      bool with_offset) {
    if (trials < 1) throw std::invalid_argument("random_ltf_baseline: trials must be positive");
    if (bags.empty()) throw std::invalid_argument("random_ltf_baseline: no bags");
    const int d = bags.front().dim();
    std::vector<LTF> candidates;
    candidates.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
        Vec w(d);
        do {
            for (int i = 0; i < d; ++i) w[i] = rng.normal();
        } while (w.norm() == 0.0);
        double c = with_offset ? rng.normal() : 0.0;
        candidates.push_back(ltf_from_direction(w, c));
    }
    LearnedHypothesis out = best_of_candidates(bags, candidates, k, q);
    out.meta.s = bags.size();
    return out;
}

LTF class_ratio_fit(const Bag& bag, const Vec& r, int target_count) {
    const int q = bag.q();
    if (target_count < 0 || target_count > q) throw std::invalid_argument("class_ratio_fit: target outside [0, q]");
    Vec pv = bag.x * r;
    std::vector<double> v(pv.data(), pv.data() + pv.size());
    std::sort(v.begin(), v.end(), std::greater<>());
    double upper = target_count == 0 ? v.front() + 1.0 : v[static_cast<std::size_t>(target_count - 1)];
    double lower = target_count == q ? v.back() - 1.0 : v[static_cast<std::size_t>(target_count)];
    if (!(upper > lower)) throw std::invalid_argument("non-generic projections");
    double tau = 0.5 * (upper + lower);
    LTF h(r / r.norm(), -tau / r.norm());
    if (positive_count(h, bag) != target_count) throw std::invalid_argument("non-generic projections");
    return h;
}

double instance_disagreement_exact(const LTF& h, const LTF& g, const GaussianSpec& dist) {
    for (const LTF* f : {&h, &g}) {
        if (std::fabs(f->c + f->r.dot(dist.mu())) > 1e-9)
            throw std::invalid_argument("instance_disagreement_exact: hyperplane does not pass through the mean");
    }
    Vec u = dist.gamma() * h.r;
    Vec v = dist.gamma() * g.r;
    double cosang = u.dot(v) / (u.norm() * v.norm());
    cosang = std::clamp(cosang, -1.0, 1.0);
    return std::acos(cosang) / M_PI;
}

double instance_disagreement_mc(const LTF& h, const LTF& g, const GaussianSpec& dist, std::size_t n,
                                RngStream& rng) {
    if (n == 0) throw std::invalid_argument("instance_disagreement_mc: n must be positive");
    std::size_t diff = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Vec x = dist.sample(rng);
        if (h(x) != g(x)) ++diff;
    }
    return static_cast<double>(diff) / static_cast<double>(n);
}

}  // namespace llp
