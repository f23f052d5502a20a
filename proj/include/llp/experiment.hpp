#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llp/learners.hpp"
#include "llp/oracle.hpp"

namespace llp {

enum class DistKind { standard, centered, general };
enum class LearnerKind { mean, spectral, general, random };

const char* dist_kind_name(DistKind k);   // "std", "centered", "general"
const char* learner_name(LearnerKind k);  // "mean", "spectral", "general", "random"
DistKind parse_dist_kind(const std::string& s);
LearnerKind parse_learner(const std::string& s);

struct CellConfig {
    int d = 0;
    int q = 0;
    int k = 0;
    std::size_t m = 0;
    std::size_t s = 0;  // disambiguation / offset bags
    DistKind dist = DistKind::centered;
    LearnerKind learner = LearnerKind::spectral;
    OracleKind bags = OracleKind::exact;
    double flip_p = 0.0;
    std::vector<double> p;  // mixture over {0..q}
    bool offset = false;    // draw c* ~ N(0, 1)
    int trials = 25;
    int test_size = 1000;
    std::size_t eval_bags = 200;
    int random_candidates = 100;
    EstimatorMode estimator = EstimatorMode::all_instances;

    [[nodiscard]] double nominal_k() const;
    [[nodiscard]] bool balanced() const;
    /// Report max(acc, 1 - acc): balanced, noisy and mixed cells.
    [[nodiscard]] bool symmetric_scoring() const;
    [[nodiscard]] std::string describe() const;
};

enum class Timing { wall, off };

struct ExperimentConfig {
    std::string name;
    std::vector<CellConfig> grid;
    std::uint64_t master_seed = 1;
    int workers = 1;
    Timing timing = Timing::wall;
};

/// Throws std::invalid_argument naming the first inconsistent cell.
void validate(const ExperimentConfig& cfg);

/// JSON config.  Grid entries may give d, q, k, m or learner as arrays; each
/// entry expands to the cartesian product in that key order.  A "defaults"
/// object supplies fields missing from entries.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct TrialResult {
    std::size_t cell = 0;
    int trial = 0;
    double accuracy = 0.0;
    double angle = 0.0;    // angle_min_dist(r_hat, r*)
    double bag_err = 0.0;  // on fresh evaluation bags
    double seconds = 0.0;
    bool failed = false;   // learner exited (e.g. singular Sigma_B)
};

/// Random covariance Q^T diag(lambda) Q, Q orthogonal from the QR of a
/// Gaussian matrix, lambda log-uniform on [0.25, 4].
Mat random_covariance(int d, RngStream& rng);

struct Problem {
    LTF target;
    GaussianSpec dist;
};

/// Target and instance distribution for one trial of a cell.
Problem make_problem(const CellConfig& cell, RngStream& rng);
OracleConfig make_oracle_config(const CellConfig& cell, const Problem& prob);

TrialResult run_trial(const CellConfig& cell, std::size_t cell_index, int trial, std::uint64_t master_seed,
                      Timing timing);

/// Stream for (master_seed, cell, trial); independent of execution order.
RngStream trial_stream(std::uint64_t master_seed, std::size_t cell_index, int trial);

/// All trials of all cells, in (cell, trial) order.  workers <= 0 uses the
/// config value.
std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg, int workers = 0);

struct AggregateRow {
    int d = 0;
    int q = 0;
    double k = 0;
    std::size_t m = 0;
    std::string learner;
    std::string dist_kind;
    int trials = 0;
    double acc_mean = 0.0;
    double acc_stderr = 0.0;
    double angle_mean = 0.0;
    double seconds_mean = 0.0;
    std::size_t cell = 0;  // not serialized

    bool operator==(const AggregateRow& o) const;
};

/// Mean and standard error (sample sd / sqrt(n)) per cell, sorted by
/// (d, q, k, m, learner, dist_kind, cell index).
std::vector<AggregateRow> aggregate(const ExperimentConfig& cfg, const std::vector<TrialResult>& results);

std::string to_csv(const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> parse_csv(const std::string& text);
/// One row per (d, q, k, m, dist_kind), one column per learner, percent.
std::string to_markdown(const std::vector<AggregateRow>& rows);
/// Accuracy against m, one polyline per (d, q, k, dist_kind, learner).
std::string to_svg_learning_curve(const std::vector<AggregateRow>& rows);

/// Writes text to path; throws std::runtime_error if the file can't be written.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace llp
