#include "hetfl/masks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "hetfl/rng.hpp"

namespace hetfl {

const char* mask_kind_name(MaskKind k) {
    switch (k) {
        case MaskKind::full: return "full";
        case MaskKind::magnitude: return "magnitude";
        case MaskKind::static_subnet: return "static-subnet";
        case MaskKind::rolling_subnet: return "rolling-subnet";
        case MaskKind::random: return "random";
        case MaskKind::coverage_optimized: return "coverage-optimized";
    }
    return "unknown";
}

MaskKind mask_kind_from_name(const std::string& name) {
    if (name == "full") return MaskKind::full;
    if (name == "magnitude") return MaskKind::magnitude;
    if (name == "static-subnet") return MaskKind::static_subnet;
    if (name == "rolling-subnet") return MaskKind::rolling_subnet;
    if (name == "random") return MaskKind::random;
    if (name == "coverage-optimized") return MaskKind::coverage_optimized;
    throw ConfigError("unknown mask strategy '" + name + "'");
}

std::size_t keep_count(double beta, std::size_t len) {
    if (len == 0) throw ConfigError("mask generation over an empty layer");
    auto k = static_cast<std::size_t>(std::ceil(beta * static_cast<double>(len) - 1e-9));
    if (k < 1) k = 1;
    return std::min(k, len);
}

Mask gen_mask(const MaskStrategy& strategy, const ParamVector& theta, std::size_t client,
              std::size_t round, std::uint64_t seed) {
    if (!(strategy.keep_fraction > 0.0) || strategy.keep_fraction > 1.0) {
        throw ConfigError("keep fraction must be in (0, 1]");
    }
    if (strategy.kind == MaskKind::full && strategy.keep_fraction != 1.0) {
        throw ConfigError("full strategy forces keep fraction 1");
    }
    Mask mask{theta.layout, std::vector<std::uint8_t>(theta.size(), 0)};
    const auto& layers = theta.layout->layers();
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const auto& layer = layers[li];
        auto* bits = mask.bits.data() + layer.offset;
        if (strategy.kind == MaskKind::full || (layer.output_layer && strategy.keep_output)) {
            std::fill(bits, bits + layer.length, std::uint8_t{1});
            continue;
        }
        const std::size_t len = layer.length;
        const std::size_t k = keep_count(strategy.keep_fraction, len);
        switch (strategy.kind) {
            case MaskKind::magnitude: {
                // keep the k largest |theta| entries; ties keep the lower index
                std::vector<std::size_t> idx(len);
                for (std::size_t i = 0; i < len; ++i) idx[i] = i;
                const double* v = theta.values.data() + layer.offset;
                std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                    const double aa = std::abs(v[a]);
                    const double bb = std::abs(v[b]);
                    if (aa != bb) return aa > bb;
                    return a < b;
                });
                for (std::size_t i = 0; i < k; ++i) bits[idx[i]] = 1;
                break;
            }
            case MaskKind::static_subnet:
                std::fill(bits, bits + k, std::uint8_t{1});
                break;
            case MaskKind::rolling_subnet: {
                const std::size_t start = (round * k) % len;
                for (std::size_t i = 0; i < k; ++i) bits[(start + i) % len] = 1;
                break;
            }
            case MaskKind::random: {
                Rng rng(derive_seed(seed, {seed_tag::random_mask, client, round, li}));
                for (std::size_t i : rng.sample_indices(len, k)) bits[i] = 1;
                break;
            }
            case MaskKind::coverage_optimized: {
                const auto regions = static_cast<std::size_t>(
                    std::ceil(1.0 / strategy.keep_fraction - 1e-9));
                const std::size_t start = ((strategy.group_offset % regions) * k) % len;
                for (std::size_t i = 0; i < k; ++i) bits[(start + i) % len] = 1;
                break;
            }
            case MaskKind::full:
                break;  // handled above
        }
    }
    return mask;
}

CoverageReport coverage(const std::vector<Mask>& masks) {
    if (masks.empty()) throw ConfigError("coverage of an empty mask list");
    const std::size_t len = masks.front().size();
    for (const auto& m : masks) {
        detail::require_same_length(m.size(), len, "coverage");
    }
    CoverageReport report;
    report.per_param_counts.assign(len, 0);
    for (const auto& m : masks) {
        for (std::size_t i = 0; i < len; ++i) report.per_param_counts[i] += m.bits[i];
    }
    report.gamma_min_round = std::numeric_limits<int>::max();
    int effective = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < len; ++i) {
        const int count = report.per_param_counts[i];
        if (count < report.gamma_min_round) {
            report.gamma_min_round = count;
            report.min_param_index = i;
        }
        if (count >= 1) effective = std::min(effective, count);
    }
    report.effective_gamma_min = effective == std::numeric_limits<int>::max() ? 0 : effective;
    return report;
}

AssignmentResult optimize_assignment(const std::vector<double>& capacities, const LayoutPtr& layout,
                                     bool keep_output) {
    AssignmentResult result;
    result.plan.resize(capacities.size());

    // Same-capacity clients take region offsets round-robin, in ascending
    // client id within each group, so they tile rather than overlap.
    std::map<double, std::size_t> seen_in_group;
    for (std::size_t c = 0; c < capacities.size(); ++c) {
        const double beta = capacities[c];
        if (!(beta > 0.0) || beta > 1.0) throw ConfigError("capacity must be in (0, 1]");
        MaskStrategy& s = result.plan[c];
        s.keep_output = keep_output;
        if (beta == 1.0) {
            s.kind = MaskKind::full;
            s.keep_fraction = 1.0;
        } else {
            s.kind = MaskKind::coverage_optimized;
            s.keep_fraction = beta;
            s.group_offset = seen_in_group[beta]++;
        }
    }

    // Probe round-0 coverage; values do not matter for these kinds.
    ParamVector probe = zeros_like(layout);
    std::vector<Mask> masks;
    masks.reserve(capacities.size());
    for (std::size_t c = 0; c < capacities.size(); ++c) {
        masks.push_back(gen_mask(result.plan[c], probe, c, 0, 0));
    }
    result.full_coverage = coverage(masks).gamma_min_round >= 1;
    return result;
}

ReductionNoiseReport check_noise_bound(const ParamVector& theta, const std::vector<Mask>& masks,
                                       double bound) {
    if (bound < 0.0 || bound >= 1.0) throw ConfigError("noise bound must be in [0, 1)");
    ReductionNoiseReport report;
    report.per_client.reserve(masks.size());
    for (std::size_t i = 0; i < masks.size(); ++i) {
        const double ratio = reduction_noise(theta, masks[i]);
        report.per_client.push_back(ratio);
        report.max_ratio = std::max(report.max_ratio, ratio);
        if (ratio > bound) report.flagged.push_back(i);
    }
    return report;
}

}  // namespace hetfl
