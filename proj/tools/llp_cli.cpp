// llp: run label-proportion learning experiments and dump bag datasets.
//
//   llp run --config grid.json --out results/ [--seed N] [--trials N]
//           [--format csv,markdown,svg] [--workers N]
//   llp dump --config grid.json --cell 0 --count 1000 --out bags.csv [--binary]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "llp/experiment.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_formats(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        if (tok != "csv" && tok != "markdown" && tok != "svg")
            throw std::invalid_argument("unknown format '" + tok + "' (expected csv, markdown, svg)");
        out.push_back(tok);
    }
    return out;
}

int cmd_run(const std::string& config, const std::string& out_dir, const std::optional<std::uint64_t>& seed,
            const std::optional<int>& trials, const std::string& formats, int workers) {
    llp::ExperimentConfig cfg = llp::load_config(config);
    if (seed) cfg.master_seed = *seed;
    if (trials) {
        for (auto& c : cfg.grid) c.trials = *trials;
    }
    if (workers > 0) cfg.workers = workers;
    llp::validate(cfg);
    auto fmts = split_formats(formats);

    fs::create_directories(out_dir);
    std::cerr << "running " << cfg.grid.size() << " cells with " << cfg.workers << " worker(s)\n";
    auto results = llp::run_experiment(cfg);
    std::size_t failed = 0;
    for (const auto& r : results) failed += r.failed ? 1 : 0;
    if (failed) std::cerr << "warning: " << failed << " trial(s) exited with a singular bag covariance\n";
    auto rows = llp::aggregate(cfg, results);

    for (const auto& f : fmts) {
        fs::path p;
        if (f == "csv") {
            p = fs::path(out_dir) / "results.csv";
            llp::write_text_file(p.string(), llp::to_csv(rows));
        } else if (f == "markdown") {
            p = fs::path(out_dir) / "results.md";
            llp::write_text_file(p.string(), llp::to_markdown(rows));
        } else {
            p = fs::path(out_dir) / "learning_curve.svg";
            llp::write_text_file(p.string(), llp::to_svg_learning_curve(rows));
        }
        std::cerr << "wrote " << p.string() << '\n';
    }
    return 0;
}

int cmd_dump(const std::string& config, std::size_t cell_index, std::size_t count, const std::string& out,
             bool binary, int trial) {
    llp::ExperimentConfig cfg = llp::load_config(config);
    if (cell_index >= cfg.grid.size())
        throw std::invalid_argument("cell index " + std::to_string(cell_index) + " out of range");
    const auto& cell = cfg.grid[cell_index];
    llp::RngStream base = llp::trial_stream(cfg.master_seed, cell_index, trial);
    llp::RngStream env = base.child(0);
    llp::RngStream draw = base.child(1);
    llp::Problem prob = llp::make_problem(cell, env);
    llp::BagOracle oracle(llp::make_oracle_config(cell, prob));
    auto bags = llp::sample_bags(oracle, count, draw);

    std::ofstream os(out, binary ? std::ios::binary : std::ios::out);
    if (!os) throw std::runtime_error("cannot write " + out);
    if (binary)
        llp::write_bags_binary(os, bags);
    else
        llp::write_bags_csv(os, bags);
    std::cerr << "wrote " << count << " bags (" << cell.describe() << ") to " << out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learning linear threshold functions from label proportions"};
    app.require_subcommand(1);

    std::string config, out_dir = "results", formats = "csv,markdown,svg";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    int workers = 0;
    auto* run = app.add_subcommand("run", "Run an experiment grid and write aggregate tables");
    run->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--seed", seed, "Master seed (overrides config)");
    run->add_option("--trials", trials, "Trials per cell (overrides config)")->check(CLI::PositiveNumber);
    run->add_option("--format", formats, "Comma-separated: csv, markdown, svg");
    run->add_option("--workers", workers, "Worker threads (overrides config)")->check(CLI::PositiveNumber);

    std::string dump_config, dump_out;
    std::size_t cell = 0, count = 1000;
    int trial = 0;
    bool binary = false;
    auto* dump = app.add_subcommand("dump", "Write bags from one grid cell's oracle to a file");
    dump->add_option("--config", dump_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    dump->add_option("--cell", cell, "Grid cell index");
    dump->add_option("--trial", trial, "Trial whose target and distribution are used");
    dump->add_option("--count", count, "Number of bags");
    dump->add_option("--out", dump_out, "Output file")->required();
    dump->add_flag("--binary", binary, "Little-endian binary instead of CSV");

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) return cmd_run(config, out_dir, seed, trials, formats, workers);
        if (dump->parsed()) return cmd_dump(dump_config, cell, count, dump_out, binary, trial);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
