#include "llp/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace llp {

LTF::LTF(Vec r_in, double c_in) : r(std::move(r_in)), c(c_in) {
    if (r.size() == 0 || std::fabs(r.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("LTF: normal vector must have unit norm");
    if (!std::isfinite(c)) throw std::invalid_argument("LTF: offset must be finite");
}

LTF ltf_from_direction(const Vec& w, double c) {
    double n = w.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("ltf_from_direction: zero vector");
    return LTF(w / n, c);
}

GaussianSpec::GaussianSpec(Vec mu, Mat sigma) : mu_(std::move(mu)), sigma_(std::move(sigma)) {
    if (mu_.size() == 0 || sigma_.rows() != mu_.size() || sigma_.cols() != mu_.size())
        throw std::invalid_argument("GaussianSpec: shape mismatch between mu and sigma");
    if (!mu_.allFinite()) throw std::invalid_argument("GaussianSpec: non-finite mean");
    EigenDecomposition e = sym_eig(sigma_);
    sigma_ = symmetrize(sigma_);
    lambda_max_ = e.values[0];
    lambda_min_ = e.values[e.values.size() - 1];
    if (!(lambda_max_ > 0.0) || lambda_min_ <= 1e-10 * lambda_max_)
        throw NotPositiveDefinite("GaussianSpec: covariance is not positive definite");
    Vec s = e.values.cwiseSqrt();
    gamma_ = symmetrize(e.vectors * s.asDiagonal() * e.vectors.transpose());
    inv_gamma_ = symmetrize(e.vectors * s.cwiseInverse().asDiagonal() * e.vectors.transpose());
}

GaussianSpec GaussianSpec::standard(int d) {
    if (d < 1) throw std::invalid_argument("GaussianSpec::standard: d must be positive");
    return GaussianSpec(Vec::Zero(d), Mat::Identity(d, d));
}

Vec GaussianSpec::sample(RngStream& rng) const {
    Vec z(dim());
    for (int i = 0; i < dim(); ++i) z[i] = rng.normal();
    return gamma_ * z + mu_;
}

Normalization normalize_ltf(const LTF& target, const GaussianSpec& dist) {
    if (target.r.size() != dist.dim()) throw std::invalid_argument("normalize_ltf: dimension mismatch");
    Vec gr = dist.gamma() * target.r;
    double n = gr.norm();
    return {-(target.c + target.r.dot(dist.mu())) / n, gr / n};
}

Mat householder_to_e1(const Vec& u) {
    const auto d = u.size();
    Vec v = u;
    v[0] -= 1.0;
    double vv = v.squaredNorm();
    if (vv <= 1e-30) return Mat::Identity(d, d);
    return Mat::Identity(d, d) - (2.0 / vv) * v * v.transpose();
}

ConditionalSampler::ConditionalSampler(const GaussianSpec& dist, const LTF& target)
    : dist_(dist), target_(target), norm_(normalize_ltf(target, dist)) {
    transform_ = dist_.gamma() * householder_to_e1(norm_.u_star);
}

Vec ConditionalSampler::sample(int label, RngStream& rng) const {
    if (label != 0 && label != 1) throw std::invalid_argument("ConditionalSampler: label must be 0 or 1");
    const int d = dist_.dim();
    Vec z(d);
    for (;;) {
        z[0] = sample_trunc_normal(rng, norm_.ell, label == 1 ? Side::above : Side::below);
        for (int i = 1; i < d; ++i) z[i] = rng.normal();
        Vec x = transform_ * z + dist_.mu();
        if (target_(x) == label) return x;
    }
}

Vec sample_conditional(const GaussianSpec& dist, const LTF& target, int label, RngStream& rng) {
    return ConditionalSampler(dist, target).sample(label, rng);
}

OracleConfig OracleConfig::exact(int q, int k, LTF target, GaussianSpec dist) {
    OracleConfig c;
    c.kind = OracleKind::exact;
    c.q = q;
    c.k = k;
    c.target = std::move(target);
    c.dist = std::move(dist);
    c.validate();
    return c;
}

OracleConfig OracleConfig::noisy(int q, int k, double flip_p, LTF target, GaussianSpec dist) {
    OracleConfig c = exact(q, k, std::move(target), std::move(dist));
    c.kind = OracleKind::noisy;
    c.flip_p = flip_p;
    c.validate();
    return c;
}

OracleConfig OracleConfig::mixed(int q, std::vector<double> p, LTF target, GaussianSpec dist) {
    OracleConfig c;
    c.kind = OracleKind::mixed;
    c.q = q;
    c.p = std::move(p);
    c.target = std::move(target);
    c.dist = std::move(dist);
    c.validate();
    return c;
}

void OracleConfig::validate() const {
    if (q < 2) throw std::invalid_argument("oracle: q must be at least 2");
    if (target.r.size() != dist.dim()) throw std::invalid_argument("oracle: target and distribution dimensions differ");
    if (kind == OracleKind::mixed) {
        if (static_cast<int>(p.size()) != q + 1)
            throw std::invalid_argument("oracle: mixture p must have q + 1 entries");
        double sum = 0.0;
        for (double v : p) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("oracle: mixture p has a negative entry");
            sum += v;
        }
        if (std::fabs(sum - 1.0) > 1e-9) throw std::invalid_argument("oracle: mixture p must sum to 1");
        return;
    }
    if (k < 1 || k > q - 1) throw std::invalid_argument("oracle: k must satisfy 1 <= k <= q-1");
    if (kind == OracleKind::noisy && !(flip_p >= 0.0 && flip_p <= 1.0))
        throw std::invalid_argument("oracle: flip_p must lie in [0, 1]");
}

double OracleConfig::nominal_k() const {
    if (kind != OracleKind::mixed) return k;
    double e = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) e += static_cast<double>(j) * p[j];
    return e;
}

BagOracle::BagOracle(OracleConfig cfg) : cfg_(std::move(cfg)), sampler_(cfg_.dist, cfg_.target) {
    cfg_.validate();
    if (cfg_.kind == OracleKind::mixed) {
        for (std::size_t j = 0; j < cfg_.p.size(); ++j) {
            if (cfg_.p[j] == 1.0) {
                degenerate_mixture_ = true;
                degenerate_k_ = static_cast<int>(j);
            }
        }
    }
}

Bag BagOracle::next(RngStream& rng) {
    const int q = cfg_.q;
    int k = cfg_.k;
    if (cfg_.kind == OracleKind::mixed) {
        if (degenerate_mixture_) {
            k = degenerate_k_;
        } else {
            double u = rng.uniform();
            double acc = 0.0;
            k = q;
            for (int j = 0; j <= q; ++j) {
                acc += cfg_.p[static_cast<std::size_t>(j)];
                if (u < acc) {
                    k = j;
                    break;
                }
            }
            while (cfg_.p[static_cast<std::size_t>(k)] == 0.0 && k > 0) --k;
        }
    }
    Bag bag;
    bag.x.resize(q, cfg_.dist.dim());
    bag.observed_count = k;
    int positives = 0;
    for (int i = 0; i < q; ++i) {
        int label = i < k ? 1 : 0;
        if (cfg_.kind == OracleKind::noisy && cfg_.flip_p > 0.0 && rng.uniform() < cfg_.flip_p) label = 1 - label;
        positives += label;
        bag.x.row(i) = sampler_.sample(label, rng).transpose();
    }
    bag.label_count = positives;
    shuffle_rows(bag.x, rng);
    return bag;
}

DatasetSource::DatasetSource(std::vector<Bag> bags) : bags_(std::move(bags)) {
    if (bags_.empty()) throw std::invalid_argument("DatasetSource: no bags");
    double sum = 0.0;
    for (const Bag& b : bags_) sum += b.observed_count;
    nominal_k_ = sum / static_cast<double>(bags_.size());
}

DatasetSource::DatasetSource(std::vector<Bag> bags, double nominal_k)
    : bags_(std::move(bags)), nominal_k_(nominal_k) {
    if (bags_.empty()) throw std::invalid_argument("DatasetSource: no bags");
}

int DatasetSource::q() const { return bags_.front().q(); }
int DatasetSource::dim() const { return bags_.front().dim(); }

Bag DatasetSource::next(RngStream&) {
    if (cursor_ >= bags_.size()) throw std::out_of_range("DatasetSource: bags exhausted");
    return bags_[cursor_++];
}

Bag sample_bag(const OracleConfig& cfg, RngStream& rng) {
    BagOracle oracle(cfg);
    return oracle.next(rng);
}

std::vector<Bag> sample_bags(BagSource& src, std::size_t count, RngStream& rng) {
    std::vector<Bag> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(src.next(rng));
    return out;
}

int bag_label_proportion_check(const Bag& bag, const LTF& target) {
    int n = 0;
    for (int i = 0; i < bag.q(); ++i) n += target(bag.x.row(i).transpose());
    return n;
}

void shuffle_rows(Mat& x, RngStream& rng) {
    for (Eigen::Index i = x.rows() - 1; i > 0; --i) {
        auto j = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
        if (j != i) x.row(i).swap(x.row(j));
    }
}

namespace {

void check_uniform_shape(const std::vector<Bag>& bags, int& d, int& q) {
    d = bags.empty() ? 0 : bags.front().dim();
    q = bags.empty() ? 0 : bags.front().q();
    for (const Bag& b : bags)
        if (b.dim() != d || b.q() != q) throw std::invalid_argument("bag dataset: bags differ in shape");
}

std::vector<long long> parse_ints(const std::string& line) {
    std::vector<long long> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoll(tok));
    return out;
}

void put_u64(std::ostream& os, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char*>(buf), 8)) throw std::runtime_error("bag dataset: truncated binary input");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
}

}  // namespace

void write_bags_csv(std::ostream& os, const std::vector<Bag>& bags) {
    int d = 0, q = 0;
    check_uniform_shape(bags, d, q);
    os << d << ',' << q << ',' << bags.size() << '\n';
    char buf[32];
    for (const Bag& b : bags) {
        os << b.label_count;
        for (int i = 0; i < q; ++i) {
            for (int j = 0; j < d; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", b.x(i, j));
                os << ',' << buf;
            }
        }
        os << '\n';
    }
    if (!os) throw std::runtime_error("bag dataset: write failed");
}

std::vector<Bag> read_bags_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("bag dataset: missing header");
    std::vector<long long> hdr = parse_ints(line);
    if (hdr.size() != 3 || hdr[0] < 0 || hdr[1] < 0 || hdr[2] < 0)
        throw std::runtime_error("bag dataset: malformed header");
    const auto d = static_cast<int>(hdr[0]);
    const auto q = static_cast<int>(hdr[1]);
    std::vector<Bag> bags;
    bags.reserve(static_cast<std::size_t>(hdr[2]));
    for (long long n = 0; n < hdr[2]; ++n) {
        if (!std::getline(is, line)) throw std::runtime_error("bag dataset: fewer bags than declared");
        std::stringstream ss(line);
        std::string tok;
        Bag b;
        if (!std::getline(ss, tok, ',')) throw std::runtime_error("bag dataset: empty row");
        b.label_count = std::stoi(tok);
        b.observed_count = b.label_count;
        b.x.resize(q, d);
        for (int i = 0; i < q; ++i) {
            for (int j = 0; j < d; ++j) {
                if (!std::getline(ss, tok, ',')) throw std::runtime_error("bag dataset: short row");
                b.x(i, j) = std::stod(tok);
            }
        }
        if (std::getline(ss, tok, ',')) throw std::runtime_error("bag dataset: long row");
        bags.push_back(std::move(b));
    }
    return bags;
}

void write_bags_binary(std::ostream& os, const std::vector<Bag>& bags) {
    int d = 0, q = 0;
    check_uniform_shape(bags, d, q);
    put_u64(os, static_cast<std::uint64_t>(d));
    put_u64(os, static_cast<std::uint64_t>(q));
    put_u64(os, bags.size());
    for (const Bag& b : bags) {
        put_u64(os, static_cast<std::uint64_t>(b.label_count));
        for (int i = 0; i < q; ++i) {
            for (int j = 0; j < d; ++j) {
                std::uint64_t bits;
                double v = b.x(i, j);
                std::memcpy(&bits, &v, 8);
                put_u64(os, bits);
            }
        }
    }
    if (!os) throw std::runtime_error("bag dataset: write failed");
}

std::vector<Bag> read_bags_binary(std::istream& is) {
    const auto d = static_cast<int>(get_u64(is));
    const auto q = static_cast<int>(get_u64(is));
    const std::uint64_t count = get_u64(is);
    std::vector<Bag> bags;
    for (std::uint64_t n = 0; n < count; ++n) {
        Bag b;
        b.label_count = static_cast<int>(get_u64(is));
        b.observed_count = b.label_count;
        b.x.resize(q, d);
        for (int i = 0; i < q; ++i) {
            for (int j = 0; j < d; ++j) {
                std::uint64_t bits = get_u64(is);
                double v;
                std::memcpy(&v, &bits, 8);
                b.x(i, j) = v;
            }
        }
        bags.push_back(std::move(b));
    }
    return bags;
}

}  // namespace llp
