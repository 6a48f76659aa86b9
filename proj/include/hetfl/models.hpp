#pragma once

#include <cstdint>
#include <vector>

#include "hetfl/params.hpp"

namespace hetfl {

enum class ModelKind { quadratic, logistic, mlp };
enum class Activation { tanh, relu };

/// Describes one differentiable objective. `input_dim` is the feature
/// count; `hidden_dim` applies to the MLP only; `class_count` applies to
/// the classification kinds.
struct ModelSpec {
    ModelKind kind = ModelKind::quadratic;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t class_count = 0;
    Activation activation = Activation::tanh;
    std::uint64_t init_seed = 1;
};

/// A slab of samples. `inputs` is rows x cols row-major. Classification
/// batches carry integer `labels`; the quadratic testbed carries real
/// `targets` (one per row).
struct Batch {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> inputs;
    std::vector<int> labels;
    std::vector<double> targets;

    bool classification() const { return !labels.empty(); }
    const double* row(std::size_t r) const { return inputs.data() + r * cols; }

    /// Gathers the given rows into a new batch (minibatch construction).
    Batch gather(const std::vector<std::size_t>& indices, std::size_t first, std::size_t count) const;
};

std::size_t parameter_count(const ModelSpec& spec);

/// Layer layout for the kind: quadratic has a single "theta" layer;
/// logistic has weight/bias; the MLP has hidden.weight ([hidden][input]
/// row-major), hidden.bias, output.weight ([hidden][classes] row-major),
/// output.bias, with the output layers marked for reduction exemption.
LayoutPtr model_layout(const ModelSpec& spec);

/// Deterministic initialization from spec.init_seed: weight layers
/// uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)), biases zero.
ParamVector init_params(const ModelSpec& spec);

/// Mean per-sample loss over the batch. Quadratic kind is the exact
/// least-squares objective; classification kinds use softmax cross-entropy.
double loss(const ModelSpec& spec, const ParamVector& theta, const Batch& batch);

/// Exact analytic gradient of loss() over the batch, same layout as theta.
ParamVector gradient(const ModelSpec& spec, const ParamVector& theta, const Batch& batch);

/// Gradient written into a preallocated vector (training-loop path).
void gradient_into(const ModelSpec& spec, const ParamVector& theta, const Batch& batch, ParamVector& out);

/// Fraction of samples whose argmax class matches the label. Argmax ties
/// break toward the lowest class index. Quadratic kind is unsupported.
double accuracy(const ModelSpec& spec, const ParamVector& theta, const Batch& batch);

/// Empirical lower estimate of the smoothness constant L. For the
/// quadratic kind this is exact: the largest eigenvalue of the batch's
/// second-moment matrix by power iteration to relative tolerance 1e-8.
/// Other kinds take the max of ||g(theta)-g(phi)|| / ||theta-phi|| over
/// `probes` random pairs.
double smoothness_estimate(const ModelSpec& spec, const Batch& data, std::size_t probes,
                           std::uint64_t seed);

/// The probe-pair estimator on its own (usable for any kind; always a
/// lower bound on the true L).
double smoothness_probe(const ModelSpec& spec, const Batch& data, std::size_t probes,
                        std::uint64_t seed);

}  // namespace hetfl
