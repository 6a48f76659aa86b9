#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hetfl/errors.hpp"

namespace hetfl {

/// One named contiguous slice of a flat parameter vector.
struct LayerInfo {
    std::string name;
    std::size_t offset = 0;
    std::size_t length = 0;
    /// Output layers can be exempted from model reduction.
    bool output_layer = false;
};

/// Immutable description of how a flat vector splits into named layers.
/// Offsets are contiguous; the sum of lengths is the vector length.
class ParamLayout {
  public:
    explicit ParamLayout(std::vector<LayerInfo> layers);

    std::size_t size() const { return total_; }
    const std::vector<LayerInfo>& layers() const { return layers_; }
    const LayerInfo& layer_of(std::size_t param_index) const;

    bool same_shape(const ParamLayout& other) const;

  private:
    std::vector<LayerInfo> layers_;
    std::size_t total_ = 0;
};

using LayoutPtr = std::shared_ptr<const ParamLayout>;

LayoutPtr make_layout(std::vector<LayerInfo> layers);

/// Single-layer layout, handy for testbeds and small examples.
LayoutPtr make_flat_layout(std::size_t length, std::string name = "theta");

/// Flat model parameters plus their layer layout.
struct ParamVector {
    LayoutPtr layout;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

/// ParamVector over a fresh single-layer layout.
ParamVector make_params(std::vector<double> values, std::string name = "theta");

/// Zero vector over an existing layout.
ParamVector zeros_like(const LayoutPtr& layout);

/// Binary mask aligned with a ParamVector: bit 1 means the parameter
/// belongs to the reduced local model.
struct Mask {
    LayoutPtr layout;
    std::vector<std::uint8_t> bits;

    std::size_t size() const { return bits.size(); }
    std::size_t ones() const;
    double density() const;
};

Mask full_mask(const LayoutPtr& layout);

/// Measured reduction-noise ratios for a set of masks against one model.
struct ReductionNoiseReport {
    std::vector<double> per_client;   ///< ratio per mask, in [0, 1]
    double max_ratio = 0.0;
    std::vector<std::size_t> flagged; ///< masks whose ratio exceeded the bound
};

/// Element-wise product: result_i = theta_i when m_i = 1, else exactly 0.
ParamVector apply_mask(const ParamVector& theta, const Mask& m);

/// Returns the reduction noise ratio ||theta - theta (.) m||^2 / ||theta||^2.
/// Defined as 0 for a zero-norm theta (degenerate input; the bound is vacuous).
double reduction_noise(const ParamVector& theta, const Mask& m);

/// Masked gradient step: result_i = theta_i - step * g_i * m_i.
/// Coordinates with m_i = 0 are returned untouched (exact equality).
ParamVector masked_axpy(const ParamVector& theta, const ParamVector& g, const Mask& m, double step);

/// In-place variant used by the training loop.
void masked_axpy_inplace(ParamVector& theta, const ParamVector& g, const Mask& m, double step);

double squared_norm(const ParamVector& v);
bool all_finite(const ParamVector& v);

namespace detail {
void require_same_length(std::size_t a, std::size_t b, const char* what);
}

}  // namespace hetfl
