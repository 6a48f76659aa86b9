#include "hetfl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "hetfl/rng.hpp"

namespace hetfl {

const char* lr_policy_name(LrPolicy p) {
    switch (p) {
        case LrPolicy::fixed: return "fixed";
        case LrPolicy::theorem_iid: return "theorem-iid";
        case LrPolicy::theorem_noniid: return "theorem-noniid";
    }
    return "unknown";
}

double theorem_lr(LrPolicy policy, double smoothness, std::size_t local_epochs, std::size_t rounds) {
    if (!(smoothness > 0.0)) throw ConfigError("smoothness constant must be positive");
    if (local_epochs < 1 || rounds < 1) throw ConfigError("schedule needs T >= 1 and Q >= 1");
    const double t = static_cast<double>(local_epochs);
    const double q = static_cast<double>(rounds);
    const double smooth_cap = 1.0 / (6.0 * smoothness * t);
    switch (policy) {
        case LrPolicy::theorem_iid:
            return std::min(smooth_cap, 1.0 / (t * std::sqrt(q)));
        case LrPolicy::theorem_noniid:
            return std::min(smooth_cap, 1.0 / std::sqrt(t * q));
        case LrPolicy::fixed:
            break;
    }
    throw ConfigError("theorem_lr requires a theorem policy");
}

ParamVector local_train(const ModelSpec& model, const Batch& data, const ClientSpec& client,
                        ParamVector theta, const Mask& m, std::size_t epochs, double gamma,
                        std::size_t round, const LocalOptions& options, LocalStats* stats) {
    if (epochs < 1) throw ConfigError("local epochs must be >= 1");
    if (client.batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (client.shard.empty()) throw ConfigError("client " + std::to_string(client.id) + " has an empty shard");
    detail::require_same_length(theta.size(), m.size(), "local_train");

    Rng rng(derive_seed(client.rng_seed, {seed_tag::local_batches, round}));
    std::vector<std::size_t> order = client.shard;
    const std::size_t batch = std::min(client.batch_size, order.size());
    ParamVector grad = zeros_like(theta.layout);
    ParamVector velocity;
    const bool use_momentum = options.momentum != 0.0;
    if (use_momentum) velocity = zeros_like(theta.layout);
    std::vector<std::size_t> draw(batch);

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        try {
            if (options.with_replacement) {
                const std::size_t steps = (order.size() + batch - 1) / batch;
                for (std::size_t s = 0; s < steps; ++s) {
                    for (auto& d : draw) d = client.shard[rng.next_index(client.shard.size())];
                    const Batch mb = data.gather(draw, 0, batch);
                    gradient_into(model, theta, mb, grad);
                    if (stats) {
                        stats->max_grad_sqnorm = std::max(stats->max_grad_sqnorm, squared_norm(grad));
                    }
                    if (use_momentum) {
                        for (std::size_t i = 0; i < velocity.size(); ++i) {
                            velocity.values[i] = options.momentum * velocity.values[i] + grad.values[i];
                        }
                        masked_axpy_inplace(theta, velocity, m, gamma);
                    } else {
                        masked_axpy_inplace(theta, grad, m, gamma);
                    }
                }
            } else {
                rng.shuffle(order);
                for (std::size_t pos = 0; pos < order.size(); pos += batch) {
                    const std::size_t take = std::min(batch, order.size() - pos);
                    const Batch mb = data.gather(order, pos, take);
                    gradient_into(model, theta, mb, grad);
                    if (stats) {
                        stats->max_grad_sqnorm = std::max(stats->max_grad_sqnorm, squared_norm(grad));
                    }
                    if (use_momentum) {
                        for (std::size_t i = 0; i < velocity.size(); ++i) {
                            velocity.values[i] = options.momentum * velocity.values[i] + grad.values[i];
                        }
                        masked_axpy_inplace(theta, velocity, m, gamma);
                    } else {
                        masked_axpy_inplace(theta, grad, m, gamma);
                    }
                }
            }
        } catch (const NumericError& e) {
            throw DivergenceError("diverged at round " + std::to_string(round) + ", client " +
                                  std::to_string(client.id) + ", epoch " + std::to_string(epoch) +
                                  ": " + e.what());
        }
        if (!all_finite(theta)) {
            throw DivergenceError("diverged at round " + std::to_string(round) + ", client " +
                                  std::to_string(client.id) + ", epoch " + std::to_string(epoch) +
                                  ": non-finite model");
        }
    }
    return theta;
}

ParamVector aggregate(std::vector<ClientUpdate> updates, const ParamVector& prev_global) {
    std::sort(updates.begin(), updates.end(),
              [](const ClientUpdate& a, const ClientUpdate& b) { return a.client_id < b.client_id; });
    const std::size_t len = prev_global.size();
    std::vector<double> sum(len, 0.0);
    std::vector<std::uint32_t> count(len, 0);
    for (const auto& u : updates) {
        detail::require_same_length(u.theta->size(), len, "aggregate");
        detail::require_same_length(u.mask->size(), len, "aggregate");
        for (std::size_t i = 0; i < len; ++i) {
            if (u.mask->bits[i]) {
                sum[i] += u.theta->values[i];
                ++count[i];
            }
        }
    }
    ParamVector out{prev_global.layout, std::vector<double>(len)};
    for (std::size_t i = 0; i < len; ++i) {
        out.values[i] = count[i] ? sum[i] / static_cast<double>(count[i]) : prev_global.values[i];
    }
    return out;
}

RoundRecord run_round(TrainingState& state, std::size_t round) {
    const std::size_t n = state.clients.size();
    if (n == 0) throw ConfigError("no clients configured");

    std::vector<std::size_t> active;
    if (state.schedule.participation >= 1.0) {
        active.resize(n);
        for (std::size_t i = 0; i < n; ++i) active[i] = i;
    } else {
        const auto want = static_cast<std::size_t>(
            std::lround(state.schedule.participation * static_cast<double>(n)));
        const std::size_t k = std::max<std::size_t>(1, std::min(want, n));
        Rng rng(derive_seed(state.run_seed, {seed_tag::participation, round}));
        active = rng.sample_indices(n, k);
        std::sort(active.begin(), active.end());
    }

    const std::size_t na = active.size();
    std::vector<Mask> masks(na);
    std::vector<double> deltas(na);
    for (std::size_t i = 0; i < na; ++i) {
        const ClientSpec& c = state.clients[active[i]];
        masks[i] = gen_mask(c.strategy, state.theta, c.id, round, state.run_seed);
        deltas[i] = reduction_noise(state.theta, masks[i]);
    }

    const LocalOptions options{state.schedule.momentum, state.schedule.with_replacement};
    std::vector<ParamVector> locals(na);
    std::vector<LocalStats> stats(na);
    auto train_one = [&](std::size_t i) {
        const ClientSpec& c = state.clients[active[i]];
        locals[i] = local_train(state.model, state.train->samples, c, apply_mask(state.theta, masks[i]),
                                masks[i], state.schedule.local_epochs, state.gamma, round, options,
                                &stats[i]);
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(state.schedule.threads, na));
    if (workers == 1) {
        for (std::size_t i = 0; i < na; ++i) train_one(i);
    } else {
        // Clients are independent; each writes its own slot, so the result
        // is identical to the sequential loop.
        std::vector<std::exception_ptr> errors(na);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < na; i += workers) {
                    try {
                        train_one(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    const CoverageReport cov = coverage(masks);
    std::vector<ClientUpdate> updates(na);
    for (std::size_t i = 0; i < na; ++i) {
        updates[i] = ClientUpdate{state.clients[active[i]].id, &locals[i], &masks[i]};
    }
    state.theta = aggregate(std::move(updates), state.theta);

    RoundRecord rec;
    rec.round = round + 1;
    rec.loss = loss(state.model, state.theta, state.train->samples);
    rec.grad_sqnorm = squared_norm(gradient(state.model, state.theta, state.train->samples));
    if (state.model.kind != ModelKind::quadratic) {
        const DatasetHandle* held = state.eval ? state.eval : state.train;
        rec.accuracy = accuracy(state.model, state.theta, held->samples);
    }
    rec.gamma_min_round = cov.gamma_min_round;
    rec.effective_gamma_min = cov.effective_gamma_min;
    rec.min_coverage_param = cov.min_param_index;
    rec.delta_sq_max = deltas.empty() ? 0.0 : *std::max_element(deltas.begin(), deltas.end());
    rec.theta_sqnorm = squared_norm(state.theta);
    rec.active_clients = na;
    for (const auto& st : stats) {
        rec.max_local_grad_sqnorm = std::max(rec.max_local_grad_sqnorm, st.max_grad_sqnorm);
    }
    rec.delta_sq_per_client = std::move(deltas);
    rec.active_ids.resize(na);
    for (std::size_t i = 0; i < na; ++i) rec.active_ids[i] = state.clients[active[i]].id;

    if (!std::isfinite(rec.loss) || !std::isfinite(rec.grad_sqnorm)) {
        throw DivergenceError("non-finite global metrics after round " + std::to_string(round));
    }
    state.gamma_min_running = std::min(state.gamma_min_running, rec.gamma_min_round);
    state.effective_gamma_min_running =
        std::min(state.effective_gamma_min_running, rec.effective_gamma_min);
    state.delta_sq_max_running = std::max(state.delta_sq_max_running, rec.delta_sq_max);
    state.max_local_grad_sqnorm = std::max(state.max_local_grad_sqnorm, rec.max_local_grad_sqnorm);
    return rec;
}

}  // namespace hetfl
