#include "llp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <json.hpp>

namespace llp {

using json = nlohmann::json;

const char* dist_kind_name(DistKind k) {
    switch (k) {
        case DistKind::standard: return "std";
        case DistKind::centered: return "centered";
        case DistKind::general: return "general";
    }
    return "?";
}

const char* learner_name(LearnerKind k) {
    switch (k) {
        case LearnerKind::mean: return "mean";
        case LearnerKind::spectral: return "spectral";
        case LearnerKind::general: return "general";
        case LearnerKind::random: return "random";
    }
    return "?";
}

DistKind parse_dist_kind(const std::string& s) {
    if (s == "std") return DistKind::standard;
    if (s == "centered") return DistKind::centered;
    if (s == "general") return DistKind::general;
    throw std::invalid_argument("unknown dist_kind '" + s + "' (expected std, centered or general)");
}

LearnerKind parse_learner(const std::string& s) {
    if (s == "mean") return LearnerKind::mean;
    if (s == "spectral") return LearnerKind::spectral;
    if (s == "general") return LearnerKind::general;
    if (s == "random") return LearnerKind::random;
    throw std::invalid_argument("unknown learner '" + s + "' (expected mean, spectral, general or random)");
}

double CellConfig::nominal_k() const {
    if (bags != OracleKind::mixed) return k;
    double e = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) e += static_cast<double>(j) * p[j];
    return e;
}

bool CellConfig::balanced() const { return std::fabs(2.0 * nominal_k() - q) < 1e-9; }

bool CellConfig::symmetric_scoring() const { return balanced() || bags != OracleKind::exact; }

std::string CellConfig::describe() const {
    std::ostringstream os;
    os << "d=" << d << " q=" << q;
    if (bags == OracleKind::mixed)
        os << " k~mixture";
    else
        os << " k=" << k;
    os << " m=" << m << " learner=" << learner_name(learner) << " dist=" << dist_kind_name(dist);
    if (bags == OracleKind::noisy) os << " flip_p=" << flip_p;
    return os.str();
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.workers < 1) throw std::invalid_argument("config: workers must be at least 1");
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
        const CellConfig& c = cfg.grid[i];
        auto fail = [&](const std::string& why) {
            throw std::invalid_argument("config cell " + std::to_string(i) + " (" + c.describe() + "): " + why);
        };
        if (c.d < 1) fail("d must be positive");
        if (c.q < 2) fail("q must be at least 2");
        if (c.bags == OracleKind::mixed) {
            if (static_cast<int>(c.p.size()) != c.q + 1) fail("mixture p must have q + 1 entries");
            double sum = 0.0;
            for (double v : c.p) {
                if (!(v >= 0.0)) fail("mixture p has a negative entry");
                sum += v;
            }
            if (std::fabs(sum - 1.0) > 1e-9) fail("mixture p must sum to 1");
        } else if (c.k < 1 || c.k > c.q - 1) {
            fail("k must satisfy 1 <= k <= q-1");
        }
        if (c.bags == OracleKind::noisy && !(c.flip_p >= 0.0 && c.flip_p <= 1.0)) fail("flip_p must lie in [0, 1]");
        if (c.learner == LearnerKind::mean) {
            if (c.m < 1) fail("m must be positive");
            if (c.balanced()) fail("balanced bags unsupported by mean-based learner");
        } else if (c.m < 2) {
            fail("m must be at least 2");
        }
        if ((c.learner == LearnerKind::general || (c.learner == LearnerKind::spectral && !c.balanced())) && c.s < 1)
            fail("s must be positive");
        if (c.trials < 1) fail("trials must be at least 1");
        if (c.test_size < 1) fail("test_size must be at least 1");
        if (c.learner == LearnerKind::random && c.random_candidates < 1) fail("random_candidates must be positive");
    }
}

namespace {

std::vector<json> as_list(const json& v) {
    if (v.is_array()) return std::vector<json>(v.begin(), v.end());
    return {v};
}

CellConfig cell_from_json(const json& e) {
    CellConfig c;
    c.d = e.at("d").get<int>();
    c.q = e.at("q").get<int>();
    c.k = e.value("k", 0);
    c.m = e.at("m").get<std::size_t>();
    c.learner = parse_learner(e.at("learner").get<std::string>());
    c.dist = parse_dist_kind(e.value("dist_kind", std::string("centered")));
    c.s = e.contains("s") && !e.at("s").is_null() ? e.at("s").get<std::size_t>() : c.m;
    c.trials = e.value("trials", 25);
    c.test_size = e.value("test_size", 1000);
    c.eval_bags = e.value("eval_bags", std::size_t{200});
    c.random_candidates = e.value("random_candidates", 100);
    c.estimator = parse_estimator_mode(e.value("estimator", std::string("all_instances")));
    c.offset = e.contains("offset") ? e.at("offset").get<bool>() : c.learner == LearnerKind::general;
    if (e.contains("p")) {
        c.bags = OracleKind::mixed;
        c.p = e.at("p").get<std::vector<double>>();
    } else if (e.contains("flip_p")) {
        c.bags = OracleKind::noisy;
        c.flip_p = e.at("flip_p").get<double>();
    }
    return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.name = doc.value("name", std::string());
        cfg.master_seed = doc.value("master_seed", std::uint64_t{1});
        cfg.workers = doc.value("workers", 1);
        std::string timing = doc.value("timing", std::string("wall"));
        if (timing == "wall")
            cfg.timing = Timing::wall;
        else if (timing == "off")
            cfg.timing = Timing::off;
        else
            throw std::invalid_argument("config: timing must be \"wall\" or \"off\"");
        json defaults = doc.value("defaults", json::object());
        const json& grid = doc.at("grid");
        if (!grid.is_array()) throw std::invalid_argument("config: grid must be an array");
        for (const json& raw : grid) {
            json entry = defaults;
            entry.update(raw);
            for (const json& d : as_list(entry.at("d")))
                for (const json& q : as_list(entry.at("q")))
                    for (const json& k : as_list(entry.value("k", json(0))))
                        for (const json& m : as_list(entry.at("m")))
                            for (const json& l : as_list(entry.at("learner"))) {
                                json one = entry;
                                one["d"] = d;
                                one["q"] = q;
                                one["k"] = k;
                                one["m"] = m;
                                one["learner"] = l;
                                cfg.grid.push_back(cell_from_json(one));
                            }
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

Mat random_covariance(int d, RngStream& rng) {
    Mat g(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Vec lam(d);
    const double lo = std::log(0.25), hi = std::log(4.0);
    for (int i = 0; i < d; ++i) lam[i] = std::exp(lo + (hi - lo) * rng.uniform());
    return symmetrize(q.transpose() * lam.asDiagonal() * q);
}

Problem make_problem(const CellConfig& cell, RngStream& rng) {
    const int d = cell.d;
    Vec w(d);
    do {
        for (int i = 0; i < d; ++i) w[i] = rng.normal();
    } while (w.norm() == 0.0);
    Vec mu = Vec::Zero(d);
    Mat sigma = Mat::Identity(d, d);
    if (cell.dist != DistKind::standard) sigma = random_covariance(d, rng);
    if (cell.dist == DistKind::general)
        for (int i = 0; i < d; ++i) mu[i] = rng.normal();
    double c = cell.offset ? rng.normal() : 0.0;
    return {ltf_from_direction(w, c), GaussianSpec(mu, sigma)};
}

OracleConfig make_oracle_config(const CellConfig& cell, const Problem& prob) {
    switch (cell.bags) {
        case OracleKind::exact: return OracleConfig::exact(cell.q, cell.k, prob.target, prob.dist);
        case OracleKind::noisy: return OracleConfig::noisy(cell.q, cell.k, cell.flip_p, prob.target, prob.dist);
        case OracleKind::mixed: return OracleConfig::mixed(cell.q, cell.p, prob.target, prob.dist);
    }
    throw std::logic_error("unreachable");
}

RngStream trial_stream(std::uint64_t master_seed, std::size_t cell_index, int trial) {
    return RngStream(master_seed, cell_index).child(static_cast<std::uint64_t>(trial));
}

TrialResult run_trial(const CellConfig& cell, std::size_t cell_index, int trial, std::uint64_t master_seed,
                      Timing timing) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    RngStream base = trial_stream(master_seed, cell_index, trial);
    RngStream env = base.child(0);
    RngStream train = base.child(1);
    RngStream test = base.child(2);
    RngStream eval = base.child(3);

    Problem prob = make_problem(cell, env);
    BagOracle oracle(make_oracle_config(cell, prob));

    TrialResult res;
    res.cell = cell_index;
    res.trial = trial;
    LTF h;
    try {
        switch (cell.learner) {
            case LearnerKind::mean: h = learn_mean_based(oracle, cell.m, train, cell.estimator).ltf; break;
            case LearnerKind::spectral: h = learn_spectral_homogeneous(oracle, cell.m, cell.s, train, cell.estimator).ltf; break;
            case LearnerKind::general: h = learn_general(oracle, cell.m, cell.s, train, cell.estimator).ltf; break;
            case LearnerKind::random: {
                std::vector<Bag> bags = sample_bags(oracle, cell.m, train);
                h = random_ltf_baseline(bags, cell.random_candidates, kObservedCount, cell.q, train, cell.offset).ltf;
                break;
            }
        }
    } catch (const NotPositiveDefinite&) {
        res.failed = true;
    } catch (const std::runtime_error&) {
        res.failed = true;
    }

    if (res.failed) {
        res.accuracy = 0.0;
        res.angle = std::sqrt(2.0);
        res.bag_err = 1.0;
    } else {
        int agree = 0;
        for (int i = 0; i < cell.test_size; ++i) {
            Vec x = prob.dist.sample(test);
            if (h(x) == prob.target(x)) ++agree;
        }
        res.accuracy = static_cast<double>(agree) / cell.test_size;
        if (cell.symmetric_scoring()) res.accuracy = std::max(res.accuracy, 1.0 - res.accuracy);
        res.angle = angle_min_dist(h.r, prob.target.r);
        if (cell.eval_bags > 0) {
            std::vector<Bag> bags = sample_bags(oracle, cell.eval_bags, eval);
            res.bag_err = bag_err_sample(h, bags, kObservedCount, cell.q);
        }
    }
    if (timing == Timing::wall) res.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return res;
}

std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg, int workers) {
    validate(cfg);
    if (workers <= 0) workers = cfg.workers;
    std::vector<std::pair<std::size_t, int>> jobs;
    for (std::size_t c = 0; c < cfg.grid.size(); ++c)
        for (int t = 0; t < cfg.grid[c].trials; ++t) jobs.emplace_back(c, t);
    std::vector<TrialResult> results(jobs.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto work = [&] {
        for (;;) {
            std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            try {
                auto [c, t] = jobs[j];
                results[j] = run_trial(cfg.grid[c], c, t, cfg.master_seed, cfg.timing);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                next.store(jobs.size());
            }
        }
    };
    const auto n = static_cast<std::size_t>(std::max(1, workers));
    if (n == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    return results;
}

bool AggregateRow::operator==(const AggregateRow& o) const {
    return d == o.d && q == o.q && k == o.k && m == o.m && learner == o.learner && dist_kind == o.dist_kind &&
           trials == o.trials && acc_mean == o.acc_mean && acc_stderr == o.acc_stderr &&
           angle_mean == o.angle_mean && seconds_mean == o.seconds_mean;
}

std::vector<AggregateRow> aggregate(const ExperimentConfig& cfg, const std::vector<TrialResult>& results) {
    std::map<std::size_t, std::vector<const TrialResult*>> by_cell;
    for (const TrialResult& r : results) {
        if (r.cell >= cfg.grid.size()) throw std::invalid_argument("aggregate: result refers to an unknown cell");
        by_cell[r.cell].push_back(&r);
    }
    std::vector<AggregateRow> rows;
    for (auto& [ci, list] : by_cell) {
        std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->trial < b->trial; });
        const CellConfig& c = cfg.grid[ci];
        AggregateRow row;
        row.cell = ci;
        row.d = c.d;
        row.q = c.q;
        row.k = c.nominal_k();
        row.m = c.m;
        row.learner = learner_name(c.learner);
        row.dist_kind = dist_kind_name(c.dist);
        row.trials = static_cast<int>(list.size());
        const double n = static_cast<double>(list.size());
        double acc = 0.0, ang = 0.0, sec = 0.0;
        for (const TrialResult* r : list) {
            acc += r->accuracy;
            ang += r->angle;
            sec += r->seconds;
        }
        row.acc_mean = acc / n;
        row.angle_mean = ang / n;
        row.seconds_mean = sec / n;
        if (list.size() > 1) {
            double ss = 0.0;
            for (const TrialResult* r : list) ss += (r->accuracy - row.acc_mean) * (r->accuracy - row.acc_mean);
            row.acc_stderr = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        }
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const AggregateRow& a, const AggregateRow& b) {
        return std::tie(a.d, a.q, a.k, a.m, a.learner, a.dist_kind, a.cell) <
               std::tie(b.d, b.q, b.k, b.m, b.learner, b.dist_kind, b.cell);
    });
    return rows;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* kCsvHeader = "d,q,k,m,learner,dist_kind,trials,acc_mean,acc_stderr,angle_mean,seconds_mean";

}  // namespace

std::string to_csv(const std::vector<AggregateRow>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const AggregateRow& r : rows) {
        out += std::to_string(r.d) + ',' + std::to_string(r.q) + ',' + fmt(r.k) + ',' + std::to_string(r.m) + ',' +
               r.learner + ',' + r.dist_kind + ',' + std::to_string(r.trials) + ',' + fmt(r.acc_mean) + ',' +
               fmt(r.acc_stderr) + ',' + fmt(r.angle_mean) + ',' + fmt(r.seconds_mean) + '\n';
    }
    return out;
}

std::vector<AggregateRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("parse_csv: unexpected header");
    std::vector<AggregateRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() != 11) throw std::invalid_argument("parse_csv: expected 11 fields in '" + line + "'");
        AggregateRow r;
        r.d = std::stoi(f[0]);
        r.q = std::stoi(f[1]);
        r.k = std::stod(f[2]);
        r.m = std::stoull(f[3]);
        r.learner = f[4];
        r.dist_kind = f[5];
        r.trials = std::stoi(f[6]);
        r.acc_mean = std::stod(f[7]);
        r.acc_stderr = std::stod(f[8]);
        r.angle_mean = std::stod(f[9]);
        r.seconds_mean = std::stod(f[10]);
        rows.push_back(r);
    }
    return rows;
}

std::string to_markdown(const std::vector<AggregateRow>& rows) {
    using Key = std::tuple<int, int, double, std::size_t, std::string>;
    std::vector<std::string> learners;
    std::map<Key, std::map<std::string, const AggregateRow*>> table;
    std::vector<Key> order;
    for (const AggregateRow& r : rows) {
        if (std::find(learners.begin(), learners.end(), r.learner) == learners.end()) learners.push_back(r.learner);
        Key key{r.d, r.q, r.k, r.m, r.dist_kind};
        if (!table.count(key)) order.push_back(key);
        table[key][r.learner] = &r;
    }
    // known learners in a fixed order, anything else after them
    auto rank = [](const std::string& l) {
        static const std::vector<std::string> known = {"mean", "spectral", "general", "random"};
        return std::find(known.begin(), known.end(), l) - known.begin();
    };
    std::stable_sort(learners.begin(), learners.end(),
                     [&](const std::string& a, const std::string& b) { return rank(a) < rank(b); });
    std::ostringstream os;
    os << "| d | q | k | m | dist |";
    for (const auto& l : learners) os << ' ' << l << " |";
    os << "\n|---|---|---|---|---|";
    for (std::size_t i = 0; i < learners.size(); ++i) os << "---|";
    os << '\n';
    char buf[64];
    for (const Key& key : order) {
        std::snprintf(buf, sizeof buf, "%g", std::get<2>(key));
        os << "| " << std::get<0>(key) << " | " << std::get<1>(key) << " | " << buf << " | " << std::get<3>(key)
           << " | " << std::get<4>(key) << " |";
        for (const auto& l : learners) {
            auto it = table[key].find(l);
            if (it == table[key].end()) {
                os << " - |";
            } else {
                std::snprintf(buf, sizeof buf, " %.2f ±%.2f |", 100.0 * it->second->acc_mean,
                              100.0 * it->second->acc_stderr);
                os << buf;
            }
        }
        os << '\n';
    }
    return os.str();
}

std::string to_svg_learning_curve(const std::vector<AggregateRow>& rows) {
    using Family = std::tuple<int, int, double, std::string, std::string>;
    std::map<Family, std::vector<const AggregateRow*>> fams;
    for (const AggregateRow& r : rows) fams[{r.d, r.q, r.k, r.dist_kind, r.learner}].push_back(&r);

    const double W = 640, H = 400, L = 60, R = 220, T = 20, B = 50;
    double mlo = 1e300, mhi = -1e300;
    for (const AggregateRow& r : rows) {
        mlo = std::min(mlo, std::log10(static_cast<double>(std::max<std::size_t>(r.m, 1))));
        mhi = std::max(mhi, std::log10(static_cast<double>(std::max<std::size_t>(r.m, 1))));
    }
    if (rows.empty() || mhi - mlo < 1e-9) {
        mlo = rows.empty() ? 0.0 : mlo - 0.5;
        mhi = mlo + 1.0;
    }
    auto px = [&](std::size_t m) {
        double lm = std::log10(static_cast<double>(std::max<std::size_t>(m, 1)));
        return L + (W - L - R) * (lm - mlo) / (mhi - mlo);
    };
    auto py = [&](double acc) { return T + (H - T - B) * (1.0 - std::clamp((acc - 0.5) / 0.5, 0.0, 1.0)); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    std::ostringstream os;
    char buf[160];
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, H - B,
                  W - R, H - B);
    os << buf;
    std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, T, L,
                  H - B);
    os << buf;
    for (double a : {0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
        std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"end\">%.0f%%</text>\n",
                      L - 6, py(a) + 4, 100 * a);
        os << buf;
    }
    std::set<std::size_t> ms;
    for (const AggregateRow& r : rows) ms.insert(r.m);
    for (std::size_t m : ms) {
        std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\">%zu</text>\n",
                      px(m), H - B + 16, m);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\">m (bags)</text>\n",
                  L + (W - L - R) / 2, H - 10);
    os << buf;

    std::size_t idx = 0;
    for (auto& [fam, list] : fams) {
        std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->m < b->m; });
        const char* color = colors[idx % 10];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const AggregateRow* r : list) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(r->m), py(r->acc_mean));
            os << buf;
        }
        os << "\"/>\n";
        for (const AggregateRow* r : list) {
            std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", px(r->m),
                          py(r->acc_mean), color);
            os << buf;
        }
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%g\" y=\"%g\" font-size=\"11\" fill=\"%s\">d=%d q=%d k=%g %s %s</text>\n",
                      W - R + 10, T + 14.0 * static_cast<double>(idx + 1), color, std::get<0>(fam),
                      std::get<1>(fam), std::get<2>(fam), std::get<3>(fam).c_str(), std::get<4>(fam).c_str());
        os << buf;
        ++idx;
    }
    os << "</svg>\n";
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace llp
