#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hetfl/experiment.hpp"

namespace hetfl {

/// Deterministic double formatting for CSV output ("%.17g": value
/// round-trips and re-runs produce identical bytes).
std::string format_double(double v);

/// Round-record CSV, schema:
/// round,loss,grad_sqnorm,accuracy,gamma_min,delta_sq_max,theta_sqnorm,active_clients
std::string round_records_csv(const std::vector<RoundRecord>& records);
void write_round_csv(const std::string& path, const std::vector<RoundRecord>& records);

nlohmann::ordered_json summary_to_json(const RunSummary& summary);

struct MeanStdev {
    double mean = 0.0;
    double stdev = 0.0;
};
MeanStdev mean_stdev(const std::vector<double>& values);

/// Aggregate summary across seed repeats: per-seed blocks plus
/// mean/stdev of final accuracy, final loss, and average grad-sqnorm.
nlohmann::ordered_json aggregate_summary_json(const ExperimentConfig& cfg,
                                              const std::vector<RunSummary>& summaries);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace hetfl
