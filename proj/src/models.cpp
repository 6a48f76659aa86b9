#include "hetfl/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "hetfl/rng.hpp"

namespace hetfl {

namespace {

void require_kind_dims(const ModelSpec& spec) {
    if (spec.input_dim == 0) throw ConfigError("model input_dim must be >= 1");
    if (spec.kind != ModelKind::quadratic && spec.class_count < 2) {
        throw ConfigError("classification model needs class_count >= 2");
    }
    if (spec.kind == ModelKind::mlp && spec.hidden_dim == 0) {
        throw ConfigError("mlp model needs hidden_dim >= 1");
    }
}

void require_theta(const ModelSpec& spec, const ParamVector& theta) {
    detail::require_same_length(theta.size(), parameter_count(spec), "model parameters");
}

void require_batch(const ModelSpec& spec, const Batch& batch) {
    if (batch.rows == 0) throw DimensionError("empty batch");
    detail::require_same_length(batch.cols, spec.input_dim, "batch feature width");
    if (spec.kind == ModelKind::quadratic) {
        detail::require_same_length(batch.targets.size(), batch.rows, "batch targets");
    } else {
        detail::require_same_length(batch.labels.size(), batch.rows, "batch labels");
    }
}

double activate(Activation a, double z) {
    return a == Activation::tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

double activate_grad(Activation a, double z, double value) {
    if (a == Activation::tanh) return 1.0 - value * value;
    return z > 0.0 ? 1.0 : 0.0;
}

// Stable log-sum-exp and softmax over `logits`, probabilities into `p`.
double softmax(const std::vector<double>& logits, std::vector<double>& p) {
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        p[c] = std::exp(logits[c] - zmax);
        sum += p[c];
    }
    for (auto& v : p) v /= sum;
    return zmax + std::log(sum);  // log sum exp
}

struct MlpDims {
    std::size_t d, h, c;
    std::size_t w1, b1, w2, b2;  // offsets
    explicit MlpDims(const ModelSpec& s)
        : d(s.input_dim), h(s.hidden_dim), c(s.class_count) {
        w1 = 0;
        b1 = d * h;
        w2 = b1 + h;
        b2 = w2 + h * c;
    }
};

}  // namespace

Batch Batch::gather(const std::vector<std::size_t>& indices, std::size_t first, std::size_t count) const {
    Batch out;
    out.rows = count;
    out.cols = cols;
    out.inputs.resize(count * cols);
    if (!labels.empty()) out.labels.resize(count);
    if (!targets.empty()) out.targets.resize(count);
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t src = indices[first + r];
        std::memcpy(out.inputs.data() + r * cols, inputs.data() + src * cols, cols * sizeof(double));
        if (!labels.empty()) out.labels[r] = labels[src];
        if (!targets.empty()) out.targets[r] = targets[src];
    }
    return out;
}

std::size_t parameter_count(const ModelSpec& spec) {
    require_kind_dims(spec);
    switch (spec.kind) {
        case ModelKind::quadratic:
            return spec.input_dim;
        case ModelKind::logistic:
            return spec.input_dim * spec.class_count + spec.class_count;
        case ModelKind::mlp:
            return spec.input_dim * spec.hidden_dim + spec.hidden_dim +
                   spec.hidden_dim * spec.class_count + spec.class_count;
    }
    throw ConfigError("unknown model kind");
}

LayoutPtr model_layout(const ModelSpec& spec) {
    require_kind_dims(spec);
    const std::size_t d = spec.input_dim;
    switch (spec.kind) {
        case ModelKind::quadratic:
            return make_flat_layout(d, "theta");
        case ModelKind::logistic: {
            const std::size_t c = spec.class_count;
            return make_layout({
                LayerInfo{"weight", 0, d * c, false},
                LayerInfo{"bias", d * c, c, false},
            });
        }
        case ModelKind::mlp: {
            const std::size_t h = spec.hidden_dim;
            const std::size_t c = spec.class_count;
            return make_layout({
                LayerInfo{"hidden.weight", 0, d * h, false},
                LayerInfo{"hidden.bias", d * h, h, false},
                LayerInfo{"output.weight", d * h + h, h * c, true},
                LayerInfo{"output.bias", d * h + h + h * c, c, true},
            });
        }
    }
    throw ConfigError("unknown model kind");
}

ParamVector init_params(const ModelSpec& spec) {
    auto layout = model_layout(spec);
    ParamVector theta = zeros_like(layout);
    Rng rng(spec.init_seed);
    auto fill_uniform = [&](const LayerInfo& l, std::size_t fan_in, std::size_t fan_out) {
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t i = 0; i < l.length; ++i) {
            theta.values[l.offset + i] = (2.0 * rng.next_double() - 1.0) * a;
        }
    };
    for (const auto& l : layout->layers()) {
        if (l.name == "theta") {
            fill_uniform(l, spec.input_dim, spec.input_dim);
        } else if (l.name == "weight") {
            fill_uniform(l, spec.input_dim, spec.class_count);
        } else if (l.name == "hidden.weight") {
            fill_uniform(l, spec.input_dim, spec.hidden_dim);
        } else if (l.name == "output.weight") {
            fill_uniform(l, spec.hidden_dim, spec.class_count);
        }
        // bias layers stay zero
    }
    return theta;
}

double loss(const ModelSpec& spec, const ParamVector& theta, const Batch& batch) {
    require_theta(spec, theta);
    require_batch(spec, batch);
    const std::size_t n = batch.rows;

    if (spec.kind == ModelKind::quadratic) {
        double acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double* x = batch.row(r);
            double z = 0.0;
            for (std::size_t j = 0; j < batch.cols; ++j) z += x[j] * theta.values[j];
            const double res = z - batch.targets[r];
            acc += 0.5 * res * res;
        }
        return acc / static_cast<double>(n);
    }

    if (spec.kind == ModelKind::logistic) {
        const std::size_t d = spec.input_dim;
        const std::size_t c = spec.class_count;
        std::vector<double> z(c), p(c);
        double acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double* x = batch.row(r);
            for (std::size_t k = 0; k < c; ++k) {
                const double* w = theta.values.data() + k * d;
                double s = theta.values[d * c + k];
                for (std::size_t j = 0; j < d; ++j) s += w[j] * x[j];
                z[k] = s;
            }
            const double lse = softmax(z, p);
            acc += lse - z[static_cast<std::size_t>(batch.labels[r])];
        }
        return acc / static_cast<double>(n);
    }

    // mlp
    const MlpDims m(spec);
    std::vector<double> z1(m.h), a1(m.h), z2(m.c), p(m.c);
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double* x = batch.row(r);
        for (std::size_t hh = 0; hh < m.h; ++hh) {
            const double* w = theta.values.data() + m.w1 + hh * m.d;
            double s = theta.values[m.b1 + hh];
            for (std::size_t j = 0; j < m.d; ++j) s += w[j] * x[j];
            z1[hh] = s;
            a1[hh] = activate(spec.activation, s);
        }
        for (std::size_t k = 0; k < m.c; ++k) z2[k] = theta.values[m.b2 + k];
        for (std::size_t hh = 0; hh < m.h; ++hh) {
            const double* w = theta.values.data() + m.w2 + hh * m.c;
            const double a = a1[hh];
            for (std::size_t k = 0; k < m.c; ++k) z2[k] += a * w[k];
        }
        const double lse = softmax(z2, p);
        acc += lse - z2[static_cast<std::size_t>(batch.labels[r])];
    }
    return acc / static_cast<double>(n);
}

void gradient_into(const ModelSpec& spec, const ParamVector& theta, const Batch& batch, ParamVector& out) {
    require_theta(spec, theta);
    require_batch(spec, batch);
    if (out.size() != theta.size()) {
        out = zeros_like(theta.layout);
    } else {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        out.layout = theta.layout;
    }
    const std::size_t n = batch.rows;
    const double inv_n = 1.0 / static_cast<double>(n);

    if (spec.kind == ModelKind::quadratic) {
        for (std::size_t r = 0; r < n; ++r) {
            const double* x = batch.row(r);
            double z = 0.0;
            for (std::size_t j = 0; j < batch.cols; ++j) z += x[j] * theta.values[j];
            const double res = (z - batch.targets[r]) * inv_n;
            for (std::size_t j = 0; j < batch.cols; ++j) out.values[j] += res * x[j];
        }
        return;
    }

    if (spec.kind == ModelKind::logistic) {
        const std::size_t d = spec.input_dim;
        const std::size_t c = spec.class_count;
        std::vector<double> z(c), p(c);
        for (std::size_t r = 0; r < n; ++r) {
            const double* x = batch.row(r);
            for (std::size_t k = 0; k < c; ++k) {
                const double* w = theta.values.data() + k * d;
                double s = theta.values[d * c + k];
                for (std::size_t j = 0; j < d; ++j) s += w[j] * x[j];
                z[k] = s;
            }
            softmax(z, p);
            const auto y = static_cast<std::size_t>(batch.labels[r]);
            for (std::size_t k = 0; k < c; ++k) {
                const double dz = (p[k] - (k == y ? 1.0 : 0.0)) * inv_n;
                double* gw = out.values.data() + k * d;
                for (std::size_t j = 0; j < d; ++j) gw[j] += dz * x[j];
                out.values[d * c + k] += dz;
            }
        }
        return;
    }

    // mlp backprop
    const MlpDims m(spec);
    std::vector<double> z1(m.h), a1(m.h), z2(m.c), p(m.c), da(m.h);
    for (std::size_t r = 0; r < n; ++r) {
        const double* x = batch.row(r);
        for (std::size_t hh = 0; hh < m.h; ++hh) {
            const double* w = theta.values.data() + m.w1 + hh * m.d;
            double s = theta.values[m.b1 + hh];
            for (std::size_t j = 0; j < m.d; ++j) s += w[j] * x[j];
            z1[hh] = s;
            a1[hh] = activate(spec.activation, s);
        }
        for (std::size_t k = 0; k < m.c; ++k) z2[k] = theta.values[m.b2 + k];
        for (std::size_t hh = 0; hh < m.h; ++hh) {
            const double* w = theta.values.data() + m.w2 + hh * m.c;
            for (std::size_t k = 0; k < m.c; ++k) z2[k] += a1[hh] * w[k];
        }
        softmax(z2, p);
        const auto y = static_cast<std::size_t>(batch.labels[r]);
        // dz2 = (p - onehot) / n
        for (std::size_t k = 0; k < m.c; ++k) p[k] = (p[k] - (k == y ? 1.0 : 0.0)) * inv_n;
        for (std::size_t hh = 0; hh < m.h; ++hh) {
            const double* w = theta.values.data() + m.w2 + hh * m.c;
            double* gw = out.values.data() + m.w2 + hh * m.c;
            double s = 0.0;
            for (std::size_t k = 0; k < m.c; ++k) {
                s += w[k] * p[k];
                gw[k] += a1[hh] * p[k];
            }
            da[hh] = s;
        }
        for (std::size_t k = 0; k < m.c; ++k) out.values[m.b2 + k] += p[k];
        for (std::size_t hh = 0; hh < m.h; ++hh) {
            const double dz = da[hh] * activate_grad(spec.activation, z1[hh], a1[hh]);
            double* gw = out.values.data() + m.w1 + hh * m.d;
            for (std::size_t j = 0; j < m.d; ++j) gw[j] += dz * x[j];
            out.values[m.b1 + hh] += dz;
        }
    }
}

ParamVector gradient(const ModelSpec& spec, const ParamVector& theta, const Batch& batch) {
    ParamVector out = zeros_like(theta.layout);
    gradient_into(spec, theta, batch, out);
    return out;
}

double accuracy(const ModelSpec& spec, const ParamVector& theta, const Batch& batch) {
    if (spec.kind == ModelKind::quadratic) {
        throw ConfigError("accuracy is not defined for the quadratic kind");
    }
    require_theta(spec, theta);
    require_batch(spec, batch);
    const std::size_t n = batch.rows;
    const std::size_t c = spec.class_count;
    std::vector<double> z(c);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < n; ++r) {
        const double* x = batch.row(r);
        if (spec.kind == ModelKind::logistic) {
            const std::size_t d = spec.input_dim;
            for (std::size_t k = 0; k < c; ++k) {
                const double* w = theta.values.data() + k * d;
                double s = theta.values[d * c + k];
                for (std::size_t j = 0; j < d; ++j) s += w[j] * x[j];
                z[k] = s;
            }
        } else {
            const MlpDims m(spec);
            std::vector<double> a1(m.h);
            for (std::size_t hh = 0; hh < m.h; ++hh) {
                const double* w = theta.values.data() + m.w1 + hh * m.d;
                double s = theta.values[m.b1 + hh];
                for (std::size_t j = 0; j < m.d; ++j) s += w[j] * x[j];
                a1[hh] = activate(spec.activation, s);
            }
            for (std::size_t k = 0; k < c; ++k) z[k] = theta.values[m.b2 + k];
            for (std::size_t hh = 0; hh < m.h; ++hh) {
                const double* w = theta.values.data() + m.w2 + hh * m.c;
                for (std::size_t k = 0; k < c; ++k) z[k] += a1[hh] * w[k];
            }
        }
        // strict > keeps the lowest index on ties
        std::size_t best = 0;
        for (std::size_t k = 1; k < c; ++k) {
            if (z[k] > z[best]) best = k;
        }
        if (static_cast<int>(best) == batch.labels[r]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

double smoothness_probe(const ModelSpec& spec, const Batch& data, std::size_t probes,
                        std::uint64_t seed) {
    if (probes < 1) throw ConfigError("smoothness probe count must be >= 1");
    const std::size_t p = parameter_count(spec);
    Rng rng(derive_seed(seed, {seed_tag::smoothness}));
    auto layout = model_layout(spec);
    ParamVector a = zeros_like(layout), b = zeros_like(layout);
    double best = 0.0;
    for (std::size_t i = 0; i < probes; ++i) {
        for (std::size_t j = 0; j < p; ++j) a.values[j] = rng.next_gaussian();
        for (std::size_t j = 0; j < p; ++j) b.values[j] = rng.next_gaussian();
        const ParamVector ga = gradient(spec, a, data);
        const ParamVector gb = gradient(spec, b, data);
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double dg = ga.values[j] - gb.values[j];
            const double dx = a.values[j] - b.values[j];
            num += dg * dg;
            den += dx * dx;
        }
        if (den > 0.0) best = std::max(best, std::sqrt(num / den));
    }
    return best;
}

double smoothness_estimate(const ModelSpec& spec, const Batch& data, std::size_t probes,
                           std::uint64_t seed) {
    if (spec.kind != ModelKind::quadratic) {
        return smoothness_probe(spec, data, probes, seed);
    }
    // Power iteration on v -> X^T X v / n, matrix-free. The operator is the
    // Hessian of the least-squares objective, so its top eigenvalue is L.
    require_batch(spec, data);
    const std::size_t d = data.cols;
    const std::size_t n = data.rows;
    Rng rng(derive_seed(seed, {seed_tag::smoothness, 0x1}));
    std::vector<double> v(d), av(d), xv(n);
    for (auto& x : v) x = rng.next_gaussian();
    double lambda = 0.0;
    for (std::size_t iter = 0; iter < 100000; ++iter) {
        for (std::size_t r = 0; r < n; ++r) {
            const double* x = data.row(r);
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += x[j] * v[j];
            xv[r] = s;
        }
        std::fill(av.begin(), av.end(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const double* x = data.row(r);
            const double s = xv[r] / static_cast<double>(n);
            for (std::size_t j = 0; j < d; ++j) av[j] += s * x[j];
        }
        double norm = 0.0;
        for (double x : av) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        const double next = norm;  // Rayleigh quotient of the normalized iterate
        for (std::size_t j = 0; j < d; ++j) v[j] = av[j] / norm;
        if (iter > 0 && std::abs(next - lambda) <= 1e-8 * std::abs(next)) {
            return next;
        }
        lambda = next;
    }
    return lambda;
}

}  // namespace hetfl
