#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetfl/params.hpp"

namespace hetfl {

enum class MaskKind {
    full,              ///< all parameters kept
    magnitude,         ///< per layer, keep the largest-|theta| entries
    static_subnet,     ///< per layer, keep the leading indices every round
    rolling_subnet,    ///< contiguous window advancing by its own width each round
    random,            ///< fresh random keep-set per (client, round)
    coverage_optimized ///< contiguous block at this client's assigned region
};

const char* mask_kind_name(MaskKind k);
MaskKind mask_kind_from_name(const std::string& name);

/// Per-client reduction strategy. keep_fraction is the capacity ratio beta;
/// group_offset selects the region for coverage_optimized clients (taken
/// modulo ceil(1/beta) at mask time). keep_output exempts layers marked as
/// output layers from reduction.
struct MaskStrategy {
    MaskKind kind = MaskKind::full;
    double keep_fraction = 1.0;
    std::size_t group_offset = 0;
    bool keep_output = true;
};

/// Fleet view: one strategy per client, indexed by client id.
using MaskPlan = std::vector<MaskStrategy>;

/// Per-parameter occurrence counts for one round's masks.
struct CoverageReport {
    std::vector<int> per_param_counts;
    int gamma_min_round = 0;
    /// Lowest parameter index achieving the minimum count.
    std::size_t min_param_index = 0;
    /// Minimum count over the parameters covered at least once (the union
    /// support, i.e. the largest common model). Equals gamma_min_round
    /// when every parameter is covered; 0 only when no mask keeps anything.
    int effective_gamma_min = 0;
};

struct AssignmentResult {
    MaskPlan plan;
    /// False when the tiling provably leaves some parameter uncovered in
    /// round 0 (gamma_min may be 0); callers should surface the flag.
    bool full_coverage = true;
};

/// Keep count for one layer: ceil(beta * len), clamped to [1, len]. The
/// tiny epsilon guards against binary-representation overshoot
/// (0.1 * 10 = 1.0000000000000002 must keep 1 entry, not 2).
std::size_t keep_count(double beta, std::size_t len);

/// Generates the round mask for one client. Deterministic in
/// (strategy, theta, client, round, seed).
Mask gen_mask(const MaskStrategy& strategy, const ParamVector& theta, std::size_t client,
              std::size_t round, std::uint64_t seed);

/// Counts, per parameter, how many masks keep it.
CoverageReport coverage(const std::vector<Mask>& masks);

/// Spreads same-capacity clients round-robin over ceil(1/beta) disjoint
/// regions per layer so that coverage never drops below the identical-mask
/// baseline. Full-capacity clients come back as kind=full.
AssignmentResult optimize_assignment(const std::vector<double>& capacities, const LayoutPtr& layout,
                                     bool keep_output = true);

/// Measures each mask's reduction-noise ratio against theta and flags the
/// masks exceeding `bound` (Assumption-style diagnostic; bound in [0, 1)).
ReductionNoiseReport check_noise_bound(const ParamVector& theta, const std::vector<Mask>& masks,
                                       double bound);

}  // namespace hetfl
