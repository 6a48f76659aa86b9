#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hetfl/config.hpp"
#include "hetfl/engine.hpp"

namespace hetfl {

/// End-of-run aggregates for one seed.
struct RunSummary {
    std::size_t rounds = 0;
    std::size_t clients = 0;
    std::uint64_t run_seed = 0;
    double learning_rate = 0.0;
    double smoothness = 0.0;
    double initial_loss = 0.0;
    double avg_grad_sqnorm = 0.0;  ///< (1/Q) sum over rounds of ||grad F||^2
    double final_loss = 0.0;
    double final_grad_sqnorm = 0.0;
    double final_accuracy = -1.0;  ///< classification only
    double local_accuracy = -1.0;  ///< shard-weighted masked-model accuracy
    int gamma_min_running = 0;
    int gamma_min_effective = 0;   ///< over the union support of the masks
    double delta_sq_max = 0.0;
    double grad_bound_estimate = 0.0;   ///< max stochastic-gradient sqnorm seen
    double grad_noise_estimate = 0.0;   ///< minibatch-gradient variance at theta_Q
    double optimality_gap = -1.0;  ///< quadratic only: F(theta_Q) - F(theta*)
    double param_fraction = 1.0;   ///< kept parameters / (clients * total), round 0
    std::vector<std::string> theory_notes;  ///< settings outside the analyzed regime
};

struct RunResult {
    std::vector<RoundRecord> records;
    RunSummary summary;
    ParamVector theta;
};

/// Everything run_experiment builds before the round loop; exposed so the
/// reference implementation and diagnostics can share it.
struct BuiltExperiment {
    DatasetHandle train;
    std::optional<DatasetHandle> eval;
    ModelSpec model;
    Partition partition;
    MaskPlan plan;
    Schedule schedule;
    std::size_t batch_size = 10;
    double gamma = 0.0;
    double smoothness = 0.0;
    std::uint64_t run_seed = 0;
    std::vector<ClientSpec> clients;
    ParamVector theta0;
};

BuiltExperiment build_experiment(const ExperimentConfig& cfg, std::size_t repeat_index);

/// Resolves per-client strategies from the config: explicit kinds/offsets
/// win; coverage-optimized clients without explicit offsets are assigned
/// round-robin within their capacity group.
MaskPlan resolve_mask_plan(const ExperimentConfig& cfg);

/// Runs Q rounds for one seed repeat and returns records plus summary.
RunResult run_experiment(const ExperimentConfig& cfg, std::size_t repeat_index = 0);

/// Plain FedAvg on the same data, seeds, and schedule: broadcast the full
/// model, run local SGD, average the client models. No masks anywhere.
/// With an all-ones capacity profile the heterogeneous engine must match
/// this bit for bit.
ParamVector fedavg_reference(const ExperimentConfig& cfg, std::size_t repeat_index = 0);

}  // namespace hetfl
