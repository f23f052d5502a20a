// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
// usage: acceptance <acceptance.json>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "llp/analysis.hpp"
#include "llp/estimators.hpp"
#include "llp/experiment.hpp"
#include "llp/learners.hpp"
#include "support.hpp"

using namespace llp;

namespace {

int failures = 0;
std::map<int, std::string> lines;  // printed in criterion order at the end

void report(int id, bool ok, const std::string& detail) {
    lines[id] += std::string("[") + (ok ? "PASS" : "FAIL") + "] criterion " + std::to_string(id) + ": " + detail + "\n";
    std::fprintf(stderr, "criterion %d done\n", id);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

struct Instance {
    LTF target;
    GaussianSpec dist;
};

Instance random_instance(int d, RngStream& rng, bool offset) {
    Vec mu = Vec::Zero(d);
    double c = 0.0;
    if (offset) {
        for (int i = 0; i < d; ++i) mu[i] = rng.normal();
        c = rng.normal();
    }
    return {LTF(testsupport::random_unit(d, rng), c), GaussianSpec(mu, testsupport::random_spd(d, rng))};
}

// ---- criteria 1-4 and 10: experiment cells --------------------------------

struct Threshold {
    const char* tag;
    double min_acc;  // percent
};

void experiment_criteria(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) {
        for (int id : {1, 2, 3, 4, 10}) report(id, false, "cannot open " + config_path);
        return;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    ExperimentConfig cfg = parse_config(text);
    std::map<std::string, std::size_t> cell_of;
    {
        auto doc = nlohmann::json::parse(text);
        std::size_t i = 0;
        for (const auto& e : doc.at("grid")) cell_of[e.at("tag").get<std::string>()] = i++;
        if (i != cfg.grid.size()) throw std::runtime_error("acceptance config entries must be single cells");
    }

    auto t0 = std::chrono::steady_clock::now();
    auto results = run_experiment(cfg);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto rows = aggregate(cfg, results);
    std::map<std::size_t, AggregateRow> by_cell;
    for (const auto& r : rows) by_cell[r.cell] = r;
    std::size_t failed_trials = 0;
    for (const auto& r : results) failed_trials += r.failed;

    auto acc = [&](const char* tag) { return 100.0 * by_cell.at(cell_of.at(tag)).acc_mean; };
    auto check_all = [&](int id, std::vector<Threshold> ts, std::string extra, bool extra_ok) {
        bool ok = extra_ok;
        std::string detail;
        for (const auto& t : ts) {
            double a = acc(t.tag);
            ok = ok && a >= t.min_acc;
            detail += std::string(t.tag) + " " + fmt("%.2f", a) + " (>= " + fmt("%.1f", t.min_acc) + "); ";
        }
        report(id, ok, detail + extra);
    };

    check_all(1, {{"centered_10_3_1", 96.0}, {"centered_10_10_5", 95.0}, {"centered_50_10_8", 91.0}},
              "full acceptance grid wall time " + fmt("%.1f", secs) + " s (budget 600 s)", secs <= 600.0);
    double mean_big = acc("std_mean_50_50_35"), spec_big = acc("std_spectral_50_50_35");
    check_all(2, {{"std_mean_10_3_1", 93.0}, {"std_spectral_10_3_1", 96.0}},
              "mean " + fmt("%.2f", mean_big) + " > spectral " + fmt("%.2f", spec_big) + " at (50,50,35,m=100)",
              mean_big > spec_big);
    check_all(3, {{"general_10_3_1", 91.0}, {"general_50_10_5", 90.0}}, "", true);
    check_all(4, {{"noisy_10_2_1", 93.0}}, "", true);
    if (failed_trials) std::printf("note: %zu trials ended in a learner exit\n", failed_trials);

    // Second run: same seed, one worker.
    auto again = run_experiment(cfg, 1);
    std::string a = to_csv(rows), b = to_csv(aggregate(cfg, again));
    report(10, a == b,
           std::string("CSV of two runs with equal seeds (") + std::to_string(cfg.workers) + " vs 1 workers) " +
               (a == b ? "byte-identical" : "differ") + ", " + std::to_string(a.size()) + " bytes");
}

// ---- criterion 5 -----------------------------------------------------------

void population_exactness() {
    RngStream rng(501, 0);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        int d = 2 + static_cast<int>(rng.uniform_index(19));
        int q = 2 + static_cast<int>(rng.uniform_index(19));
        int k = 1 + static_cast<int>(rng.uniform_index(q - 1));
        auto inst = random_instance(d, rng, t % 2 == 1);
        auto cf = closed_form_moments(inst.dist, inst.target, q, k);
        worst = std::max(worst, angle_min_dist(spectral_direction(cf.sigma_b, cf.sigma_d), inst.target.r));
    }
    report(5, worst <= 1e-6, "worst min-sign distance to r* over 20 instances " + fmt("%.3g", worst) + " (<= 1e-6)");
}

// ---- criterion 6 -----------------------------------------------------------

struct IdentityCheck {
    std::string name;
    double estimate, expected, se;
};

std::vector<IdentityCheck> moment_identities(const std::string& label, const Instance& inst, int q, int k,
                                             const KappaSet& ks, std::size_t n, RngStream& rng) {
    auto norm = normalize_ltf(inst.target, inst.dist);
    const Vec& u = norm.u_star;
    const int d = inst.dist.dim();
    // two whitened directions orthogonal to u*
    Vec v = testsupport::random_unit(d, rng);
    v -= v.dot(u) * u;
    v /= v.norm();
    Vec w = testsupport::random_unit(d, rng);
    w -= w.dot(u) * u + w.dot(v) * v;
    w /= w.norm();
    const Mat wh = inst.dist.inv_gamma();
    auto cf = closed_form_moments(inst.dist, inst.target, q, k);
    Vec mean_z = wh * (cf.mu_b - inst.dist.mu());

    BagOracle src(OracleConfig::exact(q, k, inst.target, inst.dist));
    // per-bag statistics: whitened projections of one member and one distinct pair
    std::vector<std::vector<double>> s(6, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        Bag b = src.next(rng);
        int a = static_cast<int>(rng.uniform_index(q));
        int c = static_cast<int>(rng.uniform_index(q - 1));
        if (c >= a) ++c;
        int e = static_cast<int>(rng.uniform_index(q));
        Vec zb = wh * (b.x.row(e).transpose() - inst.dist.mu()) - mean_z;
        Vec zd = wh * (b.x.row(a) - b.x.row(c)).transpose();
        double bu = u.dot(zb), bv = v.dot(zb), bw = w.dot(zb);
        double du = u.dot(zd), dv = v.dot(zd), dw = w.dot(zd);
        s[0][i] = bu * bu;                     // Var g_B
        s[1][i] = du * du;                     // Var g_D
        s[2][i] = du * du - 2.0 * bu * bu;     // (Sigma_D - 2 Sigma_B)[u, u]
        s[3][i] = dv * dv - 2.0 * bv * bv;     // [v, v]
        s[4][i] = du * dv - 2.0 * bu * bv;     // [u, v]
        s[5][i] = dv * dw - 2.0 * bv * bw;     // [v, w]
    }
    const double expected[6] = {1.0 - ks.kappa1, 2.0 * (1.0 - ks.kappa1) + ks.kappa2, ks.kappa2, 0, 0, 0};
    const char* names[6] = {"Var g_B = 1-k1", "Var g_D = 2(1-k1)+k2", "M[u,u] = k2", "M[v,v] = 0",
                            "M[u,v] = 0", "M[v,w] = 0"};
    std::vector<IdentityCheck> out;
    for (int j = 0; j < 6; ++j) {
        auto ms = testsupport::mean_std(s[j]);
        out.push_back({label + " " + names[j], ms.mean, expected[j], ms.stderr_});
    }
    return out;
}

void moment_identity_suite() {
    RngStream rng(601, 0);
    const std::size_t n = 1000000;
    std::vector<IdentityCheck> all;
    {
        auto inst = random_instance(4, rng, false);
        auto c = moment_identities("homogeneous(q=3,k=1)", inst, 3, 1, kappas_homogeneous(3, 1), n, rng);
        all.insert(all.end(), c.begin(), c.end());
    }
    for (double ell : {-2.0, 0.0, 2.0}) {
        auto inst = random_instance(4, rng, true);
        // place the hyperplane at normalized offset ell
        double g = (inst.dist.gamma() * inst.target.r).norm();
        inst.target.c = -ell * g - inst.target.r.dot(inst.dist.mu());
        std::string label = "offset(q=5,k=2,ell=" + fmt("%g", ell) + ")";
        auto c = moment_identities(label, inst, 5, 2, kappas_offset(5, 2, ell), n, rng);
        all.insert(all.end(), c.begin(), c.end());
    }
    bool ok = true;
    double worst = 0.0;
    for (const auto& c : all) {
        double z = std::fabs(c.estimate - c.expected) / c.se;
        worst = std::max(worst, z);
        if (z > 3.0) {
            ok = false;
            std::printf("  identity off: %s estimate %.6f expected %.6f (%.2f sigma)\n", c.name.c_str(), c.estimate,
                        c.expected, z);
        }
    }
    report(6, ok,
           std::to_string(all.size()) + " identity checks at 1e6 samples (homogeneous, ell in {-2,0,2}); worst " +
               fmt("%.2f", worst) + " sigma (<= 3)");
}

// ---- criterion 7 -----------------------------------------------------------

std::size_t exhaustive_satisfied(const std::vector<Bag>& bags, const Vec& r, int k) {
    std::vector<double> cuts;
    for (const auto& b : bags) {
        Vec p = b.x * r;
        cuts.insert(cuts.end(), p.data(), p.data() + p.size());
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> taus = {cuts.front() - 1.0, cuts.back() + 1.0};
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        taus.push_back(cuts[i]);
        if (i + 1 < cuts.size()) taus.push_back(0.5 * (cuts[i] + cuts[i + 1]));
    }
    std::size_t best = 0;
    for (double tau : taus) {
        std::size_t sat = 0;
        for (const auto& b : bags) {
            Vec p = b.x * r;
            int cnt = 0;
            for (Eigen::Index i = 0; i < p.size(); ++i) cnt += p[i] > tau;
            sat += cnt == k;
        }
        best = std::max(best, sat);
    }
    return best;
}

void select_offset_contract() {
    RngStream rng(701, 0);
    int bad = 0;
    int exact = 0;
    for (int t = 0; t < 100; ++t) {
        int d = 2 + static_cast<int>(rng.uniform_index(4));
        int q = 2 + static_cast<int>(rng.uniform_index(9));
        int k = 1 + static_cast<int>(rng.uniform_index(q - 1));
        int nb = 1 + static_cast<int>(rng.uniform_index(50));
        auto inst = random_instance(d, rng, true);
        BagOracle src(OracleConfig::exact(q, k, inst.target, inst.dist));
        auto bags = sample_bags(src, nb, rng);
        Vec r = t % 2 ? testsupport::random_unit(d, rng)
                      : Vec(inst.target.r + 0.3 * testsupport::random_unit(d, rng)).normalized();
        auto ch = select_offset(bags, r, k, q);
        std::size_t opt = exhaustive_satisfied(bags, r, k);
        std::size_t got = static_cast<std::size_t>(std::llround((1.0 - bag_err_sample(LTF(r, ch.c_hat), bags, k, q)) * nb));
        if (got + 1 < opt) ++bad;
        if (got == opt) ++exact;
    }
    report(7, bad == 0,
           "instances below optimum - 1: " + std::to_string(bad) + "/100 (optimum reached exactly in " +
               std::to_string(exact) + ")");
}

// ---- criterion 8 -----------------------------------------------------------

void two_binomial() {
    int violations = 0, total = 0;
    double worst_margin = 1.0;
    for (int u = 1; u <= 10; ++u)
        for (int v = 1; v <= 10; ++v)
            for (int i = 1; i <= 9; ++i)
                for (int j = 1; j <= 9; ++j) {
                    double p1 = i / 10.0, p2 = j / 10.0;
                    double lhs = prob_equal_binomials(u, p1, v, p2);
                    double rhs = std::sqrt(p_star(p1, p2));
                    worst_margin = std::min(worst_margin, rhs - lhs);
                    violations += lhs > rhs;
                    ++total;
                }
    report(8, violations == 0,
           std::to_string(violations) + " violations in " + std::to_string(total) +
               " grid points; smallest margin " + fmt("%.4f", worst_margin));
}

// ---- criterion 9 -----------------------------------------------------------

void convergence_rate() {
    RngStream rng(901, 0);
    const int d = 10, q = 5, k = 2, reps = 20;
    auto inst = random_instance(d, rng, false);
    auto cfg = OracleConfig::exact(q, k, inst.target, inst.dist);
    auto cf = closed_form_moments(inst.dist, inst.target, q, k);
    std::vector<double> xs, ys;
    std::string detail;
    for (std::size_t m : {1000u, 4000u, 16000u}) {
        double sum = 0.0;
        for (int r = 0; r < reps; ++r) {
            auto est = mean_covs_estimator(cfg, m, rng);
            sum += sym_eig(symmetrize(est.sigma_d - cf.sigma_d)).values.cwiseAbs().maxCoeff();
        }
        double err = sum / reps;
        xs.push_back(std::log(static_cast<double>(m)));
        ys.push_back(std::log(err));
        detail += "m=" + std::to_string(m) + " err " + fmt("%.4f", err) + "; ";
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= xs.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    double slope = num / den;
    report(9, slope >= -0.65 && slope <= -0.35,
           detail + "log-log slope " + fmt("%.3f", slope) + " (in [-0.65, -0.35])");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <acceptance.json>\n");
        return 2;
    }
    try {
        experiment_criteria(argv[1]);
        population_exactness();
        moment_identity_suite();
        select_offset_contract();
        two_binomial();
        convergence_rate();
    } catch (const std::exception& e) {
        for (const auto& [id, line] : lines) std::fputs(line.c_str(), stdout);
        std::printf("[FAIL] acceptance aborted: %s\n", e.what());
        return 1;
    }
    for (const auto& [id, line] : lines) std::fputs(line.c_str(), stdout);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
