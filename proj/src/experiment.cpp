#include "hetfl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hetfl/rng.hpp"

namespace hetfl {

namespace {

constexpr std::size_t kSmoothnessProbes = 32;

// Leading-subset cap for loaded datasets (desk-scale runs on full archives).
DatasetHandle take_first(DatasetHandle ds, std::size_t n) {
    if (n == 0 || n >= ds.sample_count()) return ds;
    ds.samples.rows = n;
    ds.samples.inputs.resize(n * ds.samples.cols);
    if (!ds.samples.labels.empty()) ds.samples.labels.resize(n);
    if (!ds.samples.targets.empty()) ds.samples.targets.resize(n);
    return ds;
}

DatasetHandle build_train(const ExperimentConfig& cfg, std::uint64_t data_seed) {
    const auto& ds = cfg.dataset;
    switch (ds.kind) {
        case DatasetKind::synthetic_quadratic:
            return make_quadratic(ds.dim, ds.condition, data_seed, ds.samples);
        case DatasetKind::synthetic_blobs:
            return make_blobs(ds.samples, ds.dim, ds.classes, ds.spread, data_seed, 0);
        case DatasetKind::idx_images:
            return take_first(load_idx(ds.images, ds.labels), ds.samples);
        case DatasetKind::csv_table:
            return take_first(load_csv(ds.path), ds.samples);
    }
    throw ConfigError("unknown dataset kind");
}

std::optional<DatasetHandle> build_eval(const ExperimentConfig& cfg, std::uint64_t data_seed) {
    const auto& ds = cfg.dataset;
    switch (ds.kind) {
        case DatasetKind::synthetic_quadratic:
            return std::nullopt;
        case DatasetKind::synthetic_blobs:
            if (ds.test_samples == 0) return std::nullopt;
            return make_blobs(ds.test_samples, ds.dim, ds.classes, ds.spread, data_seed, 1);
        case DatasetKind::idx_images:
            if (ds.test_images.empty()) return std::nullopt;
            return load_idx(ds.test_images, ds.test_labels);
        case DatasetKind::csv_table:
            if (ds.test_path.empty()) return std::nullopt;
            return load_csv(ds.test_path);
    }
    return std::nullopt;
}

}  // namespace

MaskPlan resolve_mask_plan(const ExperimentConfig& cfg) {
    const auto& cl = cfg.clients;
    MaskPlan plan(cl.count);
    std::map<double, std::size_t> auto_offset;  // per capacity group
    for (std::size_t i = 0; i < cl.count; ++i) {
        MaskStrategy& s = plan[i];
        s.kind = cl.kinds.at(i);
        s.keep_fraction = s.kind == MaskKind::full ? 1.0 : cl.capacities.at(i);
        s.keep_output = cl.keep_output;
        if (s.kind == MaskKind::coverage_optimized) {
            if (cl.group_offsets_set) {
                s.group_offset = cl.group_offsets.at(i);
            } else {
                s.group_offset = auto_offset[s.keep_fraction]++;
            }
        }
    }
    return plan;
}

BuiltExperiment build_experiment(const ExperimentConfig& cfg, std::size_t repeat_index) {
    BuiltExperiment built;
    built.run_seed = cfg.master_seed + repeat_index;
    built.schedule = cfg.schedule;
    built.batch_size = cfg.batch_size;

    const std::uint64_t data_seed =
        cfg.dataset.seed_set ? cfg.dataset.seed : derive_seed(built.run_seed, {seed_tag::dataset});
    built.train = build_train(cfg, data_seed);
    built.eval = build_eval(cfg, data_seed);

    built.model = cfg.model;
    if (built.model.input_dim == 0) built.model.input_dim = built.train.dim();
    if (built.model.kind != ModelKind::quadratic && built.model.class_count == 0) {
        built.model.class_count = built.train.class_count;
    }
    if (built.model.input_dim != built.train.dim()) {
        throw ConfigError("model input_dim " + std::to_string(built.model.input_dim) +
                          " does not match dataset dim " + std::to_string(built.train.dim()));
    }
    if (built.model.kind != ModelKind::quadratic &&
        built.model.class_count < built.train.class_count) {
        throw ConfigError("model classes " + std::to_string(built.model.class_count) +
                          " cannot represent dataset classes " +
                          std::to_string(built.train.class_count));
    }

    const std::uint64_t part_seed = cfg.dataset.partition.seed_set
                                        ? cfg.dataset.partition.seed
                                        : derive_seed(built.run_seed, {seed_tag::partition});
    built.partition = cfg.dataset.partition.kind == PartitionKind::iid
                          ? partition_iid(built.train, cfg.clients.count, part_seed)
                          : partition_label_skew(built.train, cfg.clients.count,
                                                 cfg.dataset.partition.max_labels, part_seed);

    built.plan = resolve_mask_plan(cfg);
    built.clients.resize(cfg.clients.count);
    for (std::size_t i = 0; i < cfg.clients.count; ++i) {
        ClientSpec& c = built.clients[i];
        c.id = i;
        c.strategy = built.plan[i];
        c.shard = built.partition.shards[i];
        c.batch_size = cfg.batch_size;
        c.rng_seed = derive_seed(built.run_seed, {seed_tag::client_stream, i});
    }

    if (cfg.schedule.lr_policy == LrPolicy::fixed) {
        built.gamma = cfg.schedule.lr_value;
        built.smoothness = 0.0;
    } else {
        built.smoothness = smoothness_estimate(built.model, built.train.samples, kSmoothnessProbes,
                                               derive_seed(built.run_seed, {seed_tag::smoothness}));
        built.gamma = theorem_lr(cfg.schedule.lr_policy, built.smoothness,
                                 cfg.schedule.local_epochs, cfg.schedule.rounds);
    }
    built.theta0 = init_params(built.model);
    return built;
}

namespace {

// Empirical variance of minibatch gradients around the full-batch gradient
// at the final model: the bounded-variance constant, measured rather than
// assumed. Probes a handful of clients with one epoch of batches each.
double estimate_gradient_noise(const BuiltExperiment& built, const ParamVector& theta) {
    const ParamVector full_grad = gradient(built.model, theta, built.train.samples);
    double worst = 0.0;
    const std::size_t probe_clients = std::min<std::size_t>(4, built.clients.size());
    ParamVector grad = zeros_like(theta.layout);
    for (std::size_t c = 0; c < probe_clients; ++c) {
        const ClientSpec& client = built.clients[c];
        const std::size_t batch = std::min(client.batch_size, client.shard.size());
        const std::size_t batches = std::min<std::size_t>(8, client.shard.size() / batch + 1);
        double acc = 0.0;
        std::size_t used = 0;
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t pos = b * batch;
            if (pos >= client.shard.size()) break;
            const std::size_t take = std::min(batch, client.shard.size() - pos);
            const Batch mb = built.train.samples.gather(client.shard, pos, take);
            gradient_into(built.model, theta, mb, grad);
            double dist = 0.0;
            for (std::size_t i = 0; i < grad.size(); ++i) {
                const double d = grad.values[i] - full_grad.values[i];
                dist += d * d;
            }
            acc += dist;
            ++used;
        }
        if (used > 0) worst = std::max(worst, acc / static_cast<double>(used));
    }
    return worst;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, std::size_t repeat_index) {
    BuiltExperiment built = build_experiment(cfg, repeat_index);

    TrainingState state;
    state.model = built.model;
    state.train = &built.train;
    state.eval = built.eval ? &*built.eval : nullptr;
    state.clients = built.clients;
    state.schedule = built.schedule;
    state.gamma = built.gamma;
    state.run_seed = built.run_seed;
    state.theta = built.theta0;

    RunResult result;
    result.summary.initial_loss = loss(state.model, state.theta, built.train.samples);
    result.records.reserve(built.schedule.rounds);
    for (std::size_t q = 0; q < built.schedule.rounds; ++q) {
        result.records.push_back(run_round(state, q));
    }

    RunSummary& s = result.summary;
    s.rounds = built.schedule.rounds;
    s.clients = built.clients.size();
    s.run_seed = built.run_seed;
    s.learning_rate = built.gamma;
    s.smoothness = built.smoothness;
    double grad_sum = 0.0;
    for (const auto& r : result.records) grad_sum += r.grad_sqnorm;
    s.avg_grad_sqnorm = grad_sum / static_cast<double>(result.records.size());
    const RoundRecord& last = result.records.back();
    s.final_loss = last.loss;
    s.final_grad_sqnorm = last.grad_sqnorm;
    s.final_accuracy = last.accuracy;
    int running = result.records.front().gamma_min_round;
    int effective = result.records.front().effective_gamma_min;
    double dmax = 0.0, gmax = 0.0;
    for (const auto& r : result.records) {
        running = std::min(running, r.gamma_min_round);
        effective = std::min(effective, r.effective_gamma_min);
        dmax = std::max(dmax, r.delta_sq_max);
        gmax = std::max(gmax, r.max_local_grad_sqnorm);
    }
    s.gamma_min_running = running;
    s.gamma_min_effective = effective;
    s.delta_sq_max = dmax;
    s.grad_bound_estimate = gmax;
    s.grad_noise_estimate = estimate_gradient_noise(built, state.theta);

    if (built.model.kind == ModelKind::quadratic) {
        ParamVector opt{state.theta.layout, built.train.quad_optimum};
        s.optimality_gap = last.loss - loss(built.model, opt, built.train.samples);
    }

    // Shard-weighted accuracy of each client's masked final model on its
    // own shard (the per-client metric), plus the round-0 kept-parameter
    // fraction used for cost accounting.
    std::size_t kept = 0;
    const std::size_t total = state.theta.size() * built.clients.size();
    double local_acc = 0.0;
    for (const auto& c : built.clients) {
        const Mask m0 = gen_mask(c.strategy, built.theta0, c.id, 0, built.run_seed);
        kept += m0.ones();
        if (built.model.kind != ModelKind::quadratic) {
            const Mask mq = gen_mask(c.strategy, state.theta, c.id, built.schedule.rounds,
                                     built.run_seed);
            const ParamVector reduced = apply_mask(state.theta, mq);
            std::vector<std::size_t> all(c.shard.begin(), c.shard.end());
            const Batch shard_batch = built.train.samples.gather(all, 0, all.size());
            const double w = static_cast<double>(c.shard.size()) /
                             static_cast<double>(built.train.sample_count());
            local_acc += w * accuracy(built.model, reduced, shard_batch);
        }
    }
    s.param_fraction = static_cast<double>(kept) / static_cast<double>(total);
    if (built.model.kind != ModelKind::quadratic) s.local_accuracy = local_acc;

    if (built.schedule.participation < 1.0) {
        s.theory_notes.push_back("partial participation (c < 1) is outside the analyzed regime");
    }
    if (built.schedule.momentum != 0.0) {
        s.theory_notes.push_back("momentum > 0 is outside the analyzed regime (plain SGD assumed)");
    }
    if (built.model.activation == Activation::relu && built.model.kind == ModelKind::mlp) {
        s.theory_notes.push_back("relu activation is not L-smooth; smoothness assumption broken");
    }
    result.theta = std::move(state.theta);
    return result;
}

ParamVector fedavg_reference(const ExperimentConfig& cfg, std::size_t repeat_index) {
    BuiltExperiment built = build_experiment(cfg, repeat_index);
    const Schedule& sched = built.schedule;
    ParamVector theta = built.theta0;
    const std::size_t n = built.clients.size();
    std::vector<std::size_t> draw;

    for (std::size_t q = 0; q < sched.rounds; ++q) {
        std::vector<std::size_t> active;
        if (sched.participation >= 1.0) {
            active.resize(n);
            for (std::size_t i = 0; i < n; ++i) active[i] = i;
        } else {
            const auto want = static_cast<std::size_t>(
                std::lround(sched.participation * static_cast<double>(n)));
            const std::size_t k = std::max<std::size_t>(1, std::min(want, n));
            Rng rng(derive_seed(built.run_seed, {seed_tag::participation, q}));
            active = rng.sample_indices(n, k);
            std::sort(active.begin(), active.end());
        }

        std::vector<ParamVector> locals;
        locals.reserve(active.size());
        for (std::size_t idx : active) {
            const ClientSpec& c = built.clients[idx];
            ParamVector local = theta;
            ParamVector grad = zeros_like(theta.layout);
            ParamVector velocity;
            if (sched.momentum != 0.0) velocity = zeros_like(theta.layout);
            Rng rng(derive_seed(c.rng_seed, {seed_tag::local_batches, q}));
            std::vector<std::size_t> order = c.shard;
            const std::size_t batch = std::min(c.batch_size, order.size());
            auto step = [&](const Batch& mb) {
                gradient_into(built.model, local, mb, grad);
                const ParamVector& dir = sched.momentum != 0.0 ? velocity : grad;
                if (sched.momentum != 0.0) {
                    for (std::size_t i = 0; i < velocity.size(); ++i) {
                        velocity.values[i] = sched.momentum * velocity.values[i] + grad.values[i];
                    }
                }
                for (std::size_t i = 0; i < local.size(); ++i) {
                    if (!std::isfinite(dir.values[i])) {
                        throw DivergenceError("fedavg reference diverged at round " + std::to_string(q));
                    }
                    local.values[i] -= built.gamma * dir.values[i];
                }
            };
            for (std::size_t epoch = 0; epoch < sched.local_epochs; ++epoch) {
                if (sched.with_replacement) {
                    const std::size_t steps = (order.size() + batch - 1) / batch;
                    draw.assign(batch, 0);
                    for (std::size_t st = 0; st < steps; ++st) {
                        for (auto& d : draw) d = c.shard[rng.next_index(c.shard.size())];
                        step(built.train.samples.gather(draw, 0, batch));
                    }
                } else {
                    rng.shuffle(order);
                    for (std::size_t pos = 0; pos < order.size(); pos += batch) {
                        const std::size_t take = std::min(batch, order.size() - pos);
                        step(built.train.samples.gather(order, pos, take));
                    }
                }
            }
            locals.push_back(std::move(local));
        }

        // plain mean over the participating clients, ascending id
        ParamVector next{theta.layout, std::vector<double>(theta.size(), 0.0)};
        for (const auto& local : locals) {
            for (std::size_t i = 0; i < next.size(); ++i) next.values[i] += local.values[i];
        }
        const auto count = static_cast<double>(locals.size());
        for (auto& v : next.values) v /= count;
        theta = std::move(next);
    }
    return theta;
}

}  // namespace hetfl
