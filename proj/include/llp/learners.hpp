#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "llp/estimators.hpp"
#include "llp/numkit.hpp"
#include "llp/oracle.hpp"

namespace llp {

/// Pass as `k` to score each bag against its own observed_count instead of a
/// single shared label count.
inline constexpr int kObservedCount = -1;

enum class Verdict {
    resolved,            // sign chosen by bag error on a fresh sample
    balanced_ambiguous,  // k = q/2: h and 1 - h are equally consistent
    not_applicable,      // learner has no sign step
};

const char* verdict_name(Verdict v);

struct LearnerMeta {
    std::string algorithm;
    std::size_t m = 0;
    std::size_t s = 0;
    Verdict verdict = Verdict::not_applicable;
    std::vector<double> candidate_bag_errors;
};

struct LearnedHypothesis {
    LTF ltf;
    LearnerMeta meta;
};

/// Positive count of h on the bag.
int positive_count(const LTF& h, const Bag& bag);

/// Fraction of bags whose positive count under h differs from k (or from
/// each bag's observed_count when k == kObservedCount).  Throws on an empty
/// list or a bag whose size is not q.
double bag_err_sample(const LTF& h, const std::vector<Bag>& bags, int k, int q);

/// Whitened generalized-eigenvector direction
/// Sigma_B^{-1/2} PrincipalEigenVector(Sigma_B^{-1/2} Sigma_D Sigma_B^{-1/2}),
/// normalized to unit length.  Throws NotPositiveDefinite when Sigma_B is
/// singular.
Vec spectral_direction(const Mat& sigma_b, const Mat& sigma_d, double tol = 1e-10);

/// Direction from the sign of (2k/q - 1) times the estimated bag mean.
/// Throws std::invalid_argument for balanced bags or a vanishing mean.
LearnedHypothesis learn_mean_based(BagSource& src, std::size_t m, RngStream& rng,
                                   EstimatorMode mode = EstimatorMode::one_per_bag);

/// Spectral direction, then (unless k = q/2) the sign with lower bag error on
/// s fresh bags; ties keep +r.
LearnedHypothesis learn_spectral_homogeneous(BagSource& src, std::size_t m, std::size_t s, RngStream& rng,
                                             EstimatorMode mode = EstimatorMode::one_per_bag);

struct OffsetChoice {
    double c_hat = 0.0;
    double achieved_err = 0.0;
    std::size_t satisfied = 0;
};

/// Offset for direction r maximizing the number of bags whose positive count
/// under pos(r^T x + c) matches their label count.
///
/// Every bag with target count t is satisfied exactly on a half-open
/// threshold interval [v_{t+1}, v_t) of its sorted projections.  The sweep
/// visits all interval endpoints, so the returned offset reaches the best
/// achievable satisfied count; the threshold is then moved to the middle of
/// its constant-count cell.  Ties go to the smallest c.
OffsetChoice select_offset(const std::vector<Bag>& bags, const Vec& r, int k, int q);

/// Spectral direction plus offset selection on s fresh bags; both signs are
/// tried unless k = q/2, ties keep +r.
LearnedHypothesis learn_general(BagSource& src, std::size_t m, std::size_t s, RngStream& rng,
                                EstimatorMode mode = EstimatorMode::one_per_bag);

/// Returns the candidate with the lowest bag error, first one on ties.
LearnedHypothesis best_of_candidates(const std::vector<Bag>& bags, const std::vector<LTF>& candidates, int k,
                                     int q);

/// `trials` random LTFs (directions uniform on the sphere, optional standard
/// normal offsets); returns the one satisfying the most bags.
LearnedHypothesis random_ltf_baseline(const std::vector<Bag>& bags, int trials, int k, int q, RngStream& rng,
                                      bool with_offset);

/// Threshold along r that labels exactly target_count instances of the bag
/// positive.  Throws std::invalid_argument on duplicate projections at the
/// boundary.
LTF class_ratio_fit(const Bag& bag, const Vec& r, int target_count);

/// Exact disagreement probability of two LTFs whose hyperplanes pass through
/// the mean: arccos(u^T u') / pi in whitened coordinates.  Throws if either
/// offset is not centered (|c + r^T mu| > 1e-9).
double instance_disagreement_exact(const LTF& h, const LTF& g, const GaussianSpec& dist);

/// Fraction of n draws from dist on which h and g disagree.
double instance_disagreement_mc(const LTF& h, const LTF& g, const GaussianSpec& dist, std::size_t n,
                                RngStream& rng);

}  // namespace llp
