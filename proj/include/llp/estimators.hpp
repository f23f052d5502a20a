#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "llp/numkit.hpp"
#include "llp/oracle.hpp"

namespace llp {

/// How many instances of each bag the estimators use.
enum class EstimatorMode {
    one_per_bag,    // one instance (batch one) and one pair (batch two) per bag
    all_instances,  // every instance and every ordered pair of one batch of m bags
};

const char* estimator_mode_name(EstimatorMode mode);
EstimatorMode parse_estimator_mode(const std::string& s);

struct MomentEstimates {
    Vec mu_b;
    Mat sigma_b;
    Mat sigma_d;
    std::size_t m = 0;
};

/// Bag moment estimator.
///
/// Batch one: m bags, one uniformly chosen instance from each; mu_b is their
/// mean and sigma_b their covariance about mu_b (divided by m).  Batch two:
/// m fresh bags, one uniformly chosen pair of distinct instances from each;
/// sigma_d is the mean of (x - x')(x - x')^T.  Throws std::invalid_argument
/// if m < 2.
MomentEstimates mean_covs_estimator(BagSource& src, std::size_t m, RngStream& rng);
MomentEstimates mean_covs_estimator(const OracleConfig& cfg, std::size_t m, RngStream& rng);

/// Same population targets as the above, estimated from every instance and
/// every ordered pair of distinct instances of each bag.  sigma_b is the
/// covariance of all q*m instances (divided by q*m); sigma_d averages the
/// per-bag mean of (x_i - x_j)(x_i - x_j)^T over i != j.
MomentEstimates bag_moments_all(const std::vector<Bag>& bags);

MomentEstimates estimate_moments(BagSource& src, std::size_t m, RngStream& rng, EstimatorMode mode);

/// Mean of one uniformly chosen instance from each of m bags, or of all
/// instances in all_instances mode.
Vec estimate_bag_mean(BagSource& src, std::size_t m, RngStream& rng,
                      EstimatorMode mode = EstimatorMode::one_per_bag);

struct ClassMoments {
    Vec mean;
    Mat cov;
};

/// Mean and covariance of N(mu, sigma) conditioned on f(x) = label.
ClassMoments class_conditional_moments(const GaussianSpec& dist, const LTF& target, int label);

struct PopulationMoments {
    Vec mu_b;
    Mat sigma_b;
    Mat sigma_d;
    Vec delta;  // E[X | f=1] - E[X | f=0]
};

/// Exact bag moments for bags of size q with k positives, 0 <= k <= q.
PopulationMoments closed_form_moments(const GaussianSpec& dist, const LTF& target, int q, int k);

struct MixtureMoments {
    Mat sigma_b;
    Mat sigma_d;
};

/// sum_k p_k^2 Sigma_{B,k} and sum_k p_k^2 Sigma_{D,k} over k = 0..q.
MixtureMoments mixture_closed_form_moments(const GaussianSpec& dist, const LTF& target, int q,
                                           const std::vector<double>& p);

}  // namespace llp
