#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hetfl/data.hpp"
#include "hetfl/masks.hpp"
#include "hetfl/models.hpp"

namespace hetfl {

/// One participating client: its reduction strategy, data shard (indices
/// into the training set), minibatch size, and private RNG stream seed.
struct ClientSpec {
    std::size_t id = 0;
    MaskStrategy strategy;
    std::vector<std::size_t> shard;
    std::size_t batch_size = 10;
    std::uint64_t rng_seed = 0;
};

enum class LrPolicy { fixed, theorem_iid, theorem_noniid };

const char* lr_policy_name(LrPolicy p);

/// Round/epoch counts and the learning-rate policy for a run.
struct Schedule {
    std::size_t rounds = 100;
    std::size_t local_epochs = 5;
    LrPolicy lr_policy = LrPolicy::theorem_iid;
    double lr_value = 0.0;       ///< used when lr_policy == fixed
    double participation = 1.0;  ///< fraction of clients active per round
    double momentum = 0.0;       ///< 0 = plain SGD (the analyzed update)
    bool with_replacement = false;
    std::size_t threads = 1;     ///< concurrent client training within a round
};

/// Metrics of the global model after one round, plus that round's mask
/// diagnostics. `accuracy` is -1 for non-classification models.
struct RoundRecord {
    std::size_t round = 0;  ///< 1-based
    double loss = 0.0;
    double grad_sqnorm = 0.0;
    double accuracy = -1.0;
    int gamma_min_round = 0;
    int effective_gamma_min = 0;  ///< over the union support (covered params)
    double delta_sq_max = 0.0;
    double theta_sqnorm = 0.0;
    std::size_t active_clients = 0;
    double max_local_grad_sqnorm = 0.0;  ///< largest stochastic gradient seen
    std::vector<double> delta_sq_per_client;  ///< aligned with active client ids
    std::vector<std::size_t> active_ids;
    std::size_t min_coverage_param = 0;
};

/// Learning rate from the convergence conditions: the IID policy returns
/// min(1/(6 L T), 1/(T sqrt(Q))); the non-IID policy returns
/// min(1/(6 L T), 1/sqrt(T Q)).
double theorem_lr(LrPolicy policy, double smoothness, std::size_t local_epochs, std::size_t rounds);

struct LocalOptions {
    double momentum = 0.0;
    bool with_replacement = false;
};

/// Observed magnitudes from one local training call, for the runtime
/// diagnostics (bounded-gradient constant).
struct LocalStats {
    double max_grad_sqnorm = 0.0;
};

/// Runs T local epochs of masked minibatch SGD from theta0 (which must
/// already be masked). Masked-out coordinates stay exactly 0. Epoch order
/// comes from the client's RNG stream; the last short batch is kept.
/// Throws DivergenceError (naming round/client/epoch) if the model or a
/// gradient goes non-finite.
ParamVector local_train(const ModelSpec& model, const Batch& data, const ClientSpec& client,
                        ParamVector theta0, const Mask& m, std::size_t epochs, double gamma,
                        std::size_t round, const LocalOptions& options = {},
                        LocalStats* stats = nullptr);

struct ClientUpdate {
    std::size_t client_id = 0;
    const ParamVector* theta = nullptr;
    const Mask* mask = nullptr;
};

/// Per-parameter covering average: each coordinate is the mean of the
/// local values of exactly the clients whose mask keeps it, summed in
/// ascending client-id order. Uncovered coordinates carry the previous
/// global value forward unchanged.
ParamVector aggregate(std::vector<ClientUpdate> updates, const ParamVector& prev_global);

/// Mutable state threaded through run_round.
struct TrainingState {
    ModelSpec model;
    const DatasetHandle* train = nullptr;
    const DatasetHandle* eval = nullptr;  ///< optional held-out set for accuracy
    std::vector<ClientSpec> clients;
    Schedule schedule;
    double gamma = 0.0;
    std::uint64_t run_seed = 0;
    ParamVector theta;

    int gamma_min_running = std::numeric_limits<int>::max();
    int effective_gamma_min_running = std::numeric_limits<int>::max();
    double delta_sq_max_running = 0.0;
    double max_local_grad_sqnorm = 0.0;
};

/// One full round: sample the active set, generate masks, reduce, train
/// locally (possibly on several threads; results are identical to
/// sequential execution), aggregate, and measure full-model metrics on the
/// full dataset.
RoundRecord run_round(TrainingState& state, std::size_t round);

}  // namespace hetfl
