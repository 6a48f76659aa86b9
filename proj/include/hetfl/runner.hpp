#pragma once

#include <string>
#include <vector>

#include "hetfl/report.hpp"

namespace hetfl {

/// Output of one `run` invocation: per-seed CSV logs plus one aggregate
/// summary JSON, all under `out_dir`.
struct RunFiles {
    std::vector<std::string> csv_paths;
    std::string summary_path;
    std::vector<RunSummary> summaries;
};

/// Resolves the effective output directory: `cli_override` beats the
/// config value; the HETFL_OUT_ROOT environment variable, when set,
/// prefixes whichever of the two applies.
std::string resolve_output_dir(const ExperimentConfig& cfg, const std::string& cli_override);

/// Runs all seed repeats of a config and writes logs + summary.
RunFiles run_to_files(const ExperimentConfig& cfg, const std::string& out_dir);

struct CompareRow {
    std::string name;
    int gamma_min = 0;
    double delta_sq_max = 0.0;
    double param_fraction = 1.0;
    MeanStdev final_loss;
    MeanStdev final_accuracy;
    bool has_accuracy = false;
    MeanStdev avg_grad_sqnorm;
    double d_loss_vs_first = 0.0;
    double d_accuracy_vs_first = 0.0;
};

struct CompareResult {
    std::vector<CompareRow> rows;
    std::string csv;
    std::string table;  ///< human-readable rendering
};

/// Runs each config on the same seeds and tabulates them side by side.
/// The configs must agree on model, dataset, schedule, and seeds
/// (comparability is validated, never coerced).
CompareResult compare_experiments(const std::vector<ExperimentConfig>& cfgs);

struct CoverageRow {
    std::size_t round = 0;
    std::size_t min_param_index = 0;
    int gamma_min_round = 0;
    int gamma_min_running = 0;
    int effective_gamma_min = 0;
    std::vector<double> delta_sq_per_client;
};

/// Coverage/noise diagnostics for a config without training: masks are
/// generated per round against the initial model.
std::vector<CoverageRow> coverage_probe(const ExperimentConfig& cfg, std::size_t rounds);

/// Coverage CSV, schema:
/// round,param_index_min,gamma_min_round,gamma_min_running,delta_sq_client_0,...
std::string coverage_csv(const std::vector<CoverageRow>& rows);

}  // namespace hetfl
