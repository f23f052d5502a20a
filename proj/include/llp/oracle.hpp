#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "llp/numkit.hpp"
#include "llp/rng.hpp"

namespace llp {

/// pos(t) = 1 iff t > 0.
inline int pos(double t) { return t > 0.0 ? 1 : 0; }

/// Halfspace pos(r^T x + c) with unit normal r.
struct LTF {
    Vec r;
    double c = 0.0;

    LTF() = default;
    /// Throws std::invalid_argument unless |r| = 1 within 1e-9.
    LTF(Vec r, double c);

    [[nodiscard]] int operator()(const Vec& x) const { return pos(r.dot(x) + c); }
    [[nodiscard]] LTF negated() const { return LTF(-r, -c); }
};

/// Normalize a nonzero vector into an LTF with offset c.
LTF ltf_from_direction(const Vec& w, double c = 0.0);

class GaussianSpec {
  public:
    /// Throws NotPositiveDefinite if sigma is not PD, std::invalid_argument on
    /// shape mismatch.
    GaussianSpec(Vec mu, Mat sigma);
    static GaussianSpec standard(int d);

    [[nodiscard]] int dim() const { return static_cast<int>(mu_.size()); }
    [[nodiscard]] const Vec& mu() const { return mu_; }
    [[nodiscard]] const Mat& sigma() const { return sigma_; }
    [[nodiscard]] const Mat& gamma() const { return gamma_; }
    [[nodiscard]] const Mat& inv_gamma() const { return inv_gamma_; }
    [[nodiscard]] double lambda_min() const { return lambda_min_; }
    [[nodiscard]] double lambda_max() const { return lambda_max_; }

    /// Unconditional draw from N(mu, sigma).
    Vec sample(RngStream& rng) const;

  private:
    Vec mu_;
    Mat sigma_;
    Mat gamma_;
    Mat inv_gamma_;
    double lambda_min_ = 0.0;
    double lambda_max_ = 0.0;
};

struct Normalization {
    double ell;   // f(X) = 1 iff (whitened coordinate along u_star) > ell
    Vec u_star;   // Gamma r / |Gamma r|
};

Normalization normalize_ltf(const LTF& target, const GaussianSpec& dist);

/// Householder reflection H (symmetric, orthogonal) with H u = e1.  Returns
/// the identity when u is already e1 to within 1e-15.
Mat householder_to_e1(const Vec& u);

/// Draws from N(mu, sigma) conditioned on f(x) = label.
///
/// x = Gamma H z + mu where H is the Householder map sending u* to e1 and
/// z has a truncated first coordinate.  A draw that lands on the wrong side
/// after rounding is redrawn.
class ConditionalSampler {
  public:
    ConditionalSampler(const GaussianSpec& dist, const LTF& target);

    Vec sample(int label, RngStream& rng) const;
    [[nodiscard]] double ell() const { return norm_.ell; }
    [[nodiscard]] const Vec& u_star() const { return norm_.u_star; }
    [[nodiscard]] const GaussianSpec& dist() const { return dist_; }
    [[nodiscard]] const LTF& target() const { return target_; }

  private:
    GaussianSpec dist_;
    LTF target_;
    Normalization norm_;
    Mat transform_;  // Gamma * H
};

Vec sample_conditional(const GaussianSpec& dist, const LTF& target, int label, RngStream& rng);

struct Bag {
    Mat x;                   // q rows, one instance per row
    int label_count = 0;     // instances with f(x) = 1
    int observed_count = 0;  // label count reported to the learner

    [[nodiscard]] int q() const { return static_cast<int>(x.rows()); }
    [[nodiscard]] int dim() const { return static_cast<int>(x.cols()); }
};

enum class OracleKind { exact, noisy, mixed };

struct OracleConfig {
    OracleKind kind = OracleKind::exact;
    int q = 0;
    int k = 0;                  // exact / noisy
    double flip_p = 0.0;        // noisy
    std::vector<double> p;      // mixed: distribution over {0..q}
    LTF target;
    GaussianSpec dist = GaussianSpec::standard(1);

    static OracleConfig exact(int q, int k, LTF target, GaussianSpec dist);
    static OracleConfig noisy(int q, int k, double flip_p, LTF target, GaussianSpec dist);
    static OracleConfig mixed(int q, std::vector<double> p, LTF target, GaussianSpec dist);

    /// Throws std::invalid_argument describing the first violated constraint.
    void validate() const;
    /// k for exact/noisy; expected label count for mixed.
    [[nodiscard]] double nominal_k() const;
};

/// Anything that hands out bags.  Single consumer.
class BagSource {
  public:
    virtual ~BagSource() = default;
    [[nodiscard]] virtual int q() const = 0;
    [[nodiscard]] virtual int dim() const = 0;
    [[nodiscard]] virtual double nominal_k() const = 0;
    virtual Bag next(RngStream& rng) = 0;
};

class BagOracle final : public BagSource {
  public:
    explicit BagOracle(OracleConfig cfg);

    [[nodiscard]] int q() const override { return cfg_.q; }
    [[nodiscard]] int dim() const override { return cfg_.dist.dim(); }
    [[nodiscard]] double nominal_k() const override { return cfg_.nominal_k(); }
    Bag next(RngStream& rng) override;

    [[nodiscard]] const OracleConfig& config() const { return cfg_; }
    [[nodiscard]] const ConditionalSampler& sampler() const { return sampler_; }

  private:
    OracleConfig cfg_;
    ConditionalSampler sampler_;
    bool degenerate_mixture_ = false;
    int degenerate_k_ = 0;
};

/// Replays a fixed list of bags in order.  Throws std::out_of_range when
/// exhausted.
class DatasetSource final : public BagSource {
  public:
    explicit DatasetSource(std::vector<Bag> bags);
    DatasetSource(std::vector<Bag> bags, double nominal_k);

    [[nodiscard]] int q() const override;
    [[nodiscard]] int dim() const override;
    [[nodiscard]] double nominal_k() const override { return nominal_k_; }
    Bag next(RngStream& rng) override;

    [[nodiscard]] std::size_t remaining() const { return bags_.size() - cursor_; }

  private:
    std::vector<Bag> bags_;
    std::size_t cursor_ = 0;
    double nominal_k_ = 0.0;
};

Bag sample_bag(const OracleConfig& cfg, RngStream& rng);
std::vector<Bag> sample_bags(BagSource& src, std::size_t count, RngStream& rng);

/// Number of instances in the bag with target(x) = 1.
int bag_label_proportion_check(const Bag& bag, const LTF& target);

/// In-place Fisher-Yates shuffle of the rows of x.
void shuffle_rows(Mat& x, RngStream& rng);

// Bag dataset persistence.  Both formats carry (d, q, count) then, per bag,
// label_count followed by q*d values row-major.  On read, observed_count is
// set to label_count.
void write_bags_csv(std::ostream& os, const std::vector<Bag>& bags);
std::vector<Bag> read_bags_csv(std::istream& is);
void write_bags_binary(std::ostream& os, const std::vector<Bag>& bags);
std::vector<Bag> read_bags_binary(std::istream& is);

}  // namespace llp
