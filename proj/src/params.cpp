#include "hetfl/params.hpp"

#include <cmath>
#include <numeric>
#include <utility>

namespace hetfl {

namespace detail {
void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}
}  // namespace detail

ParamLayout::ParamLayout(std::vector<LayerInfo> layers) : layers_(std::move(layers)) {
    std::size_t expected_offset = 0;
    for (const auto& l : layers_) {
        if (l.length == 0) {
            throw ConfigError("layer '" + l.name + "' has zero length");
        }
        if (l.offset != expected_offset) {
            throw ConfigError("layer '" + l.name + "' offset " + std::to_string(l.offset) +
                              " is not contiguous (expected " + std::to_string(expected_offset) + ")");
        }
        expected_offset += l.length;
    }
    total_ = expected_offset;
}

const LayerInfo& ParamLayout::layer_of(std::size_t param_index) const {
    for (const auto& l : layers_) {
        if (param_index < l.offset + l.length) return l;
    }
    throw DimensionError("parameter index " + std::to_string(param_index) + " outside layout of size " +
                         std::to_string(total_));
}

bool ParamLayout::same_shape(const ParamLayout& other) const {
    if (total_ != other.total_ || layers_.size() != other.layers_.size()) return false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (layers_[i].length != other.layers_[i].length) return false;
    }
    return true;
}

LayoutPtr make_layout(std::vector<LayerInfo> layers) {
    return std::make_shared<const ParamLayout>(std::move(layers));
}

LayoutPtr make_flat_layout(std::size_t length, std::string name) {
    return make_layout({LayerInfo{std::move(name), 0, length, false}});
}

ParamVector make_params(std::vector<double> values, std::string name) {
    auto layout = make_flat_layout(values.size(), std::move(name));
    return ParamVector{std::move(layout), std::move(values)};
}

ParamVector zeros_like(const LayoutPtr& layout) {
    return ParamVector{layout, std::vector<double>(layout->size(), 0.0)};
}

std::size_t Mask::ones() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
}

double Mask::density() const {
    return bits.empty() ? 0.0 : static_cast<double>(ones()) / static_cast<double>(bits.size());
}

Mask full_mask(const LayoutPtr& layout) {
    return Mask{layout, std::vector<std::uint8_t>(layout->size(), 1)};
}

ParamVector apply_mask(const ParamVector& theta, const Mask& m) {
    detail::require_same_length(theta.size(), m.size(), "apply_mask");
    ParamVector out{theta.layout, std::vector<double>(theta.size())};
    for (std::size_t i = 0; i < theta.size(); ++i) {
        out.values[i] = m.bits[i] ? theta.values[i] : 0.0;
    }
    return out;
}

double reduction_noise(const ParamVector& theta, const Mask& m) {
    detail::require_same_length(theta.size(), m.size(), "reduction_noise");
    double removed = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double sq = theta.values[i] * theta.values[i];
        total += sq;
        if (!m.bits[i]) removed += sq;
    }
    if (total == 0.0) return 0.0;  // degenerate zero-norm model
    return removed / total;
}

void masked_axpy_inplace(ParamVector& theta, const ParamVector& g, const Mask& m, double step) {
    detail::require_same_length(theta.size(), g.size(), "masked_axpy");
    detail::require_same_length(theta.size(), m.size(), "masked_axpy");
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!m.bits[i]) continue;
        if (!std::isfinite(g.values[i])) {
            throw NumericError("non-finite gradient in layer '" + theta.layout->layer_of(i).name + "'");
        }
        theta.values[i] -= step * g.values[i];
    }
}

ParamVector masked_axpy(const ParamVector& theta, const ParamVector& g, const Mask& m, double step) {
    ParamVector out = theta;
    masked_axpy_inplace(out, g, m, step);
    return out;
}

double squared_norm(const ParamVector& v) {
    double s = 0.0;
    for (double x : v.values) s += x * x;
    return s;
}

bool all_finite(const ParamVector& v) {
    for (double x : v.values) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace hetfl
