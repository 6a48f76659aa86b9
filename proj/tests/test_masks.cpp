#include <doctest.h>

#include <set>

#include "hetfl/masks.hpp"
#include "hetfl/rng.hpp"
#include "oracles.hpp"

using namespace hetfl;

namespace {

std::vector<std::uint8_t> bits_of(const Mask& m) { return m.bits; }

ParamVector random_theta(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.next_gaussian();
    return make_params(v);
}

}  // namespace

TEST_CASE("keep_count rounds up and survives representation noise") {
    CHECK(keep_count(0.5, 4) == 2);
    CHECK(keep_count(0.5, 3) == 2);
    CHECK(keep_count(1.0 / 3.0, 3) == 1);
    CHECK(keep_count(0.1, 10) == 1);  // 0.1*10 overshoots in binary
    CHECK(keep_count(1.0, 7) == 7);
    CHECK(keep_count(0.01, 5) == 1);  // never empty
}

TEST_CASE("magnitude masks keep the largest entries with low-index ties") {
    const ParamVector theta = make_params({0.5, -2, 1, 0.1});
    const Mask m = gen_mask({MaskKind::magnitude, 0.5}, theta, 0, 0, 1);
    CHECK(bits_of(m) == std::vector<std::uint8_t>{0, 1, 1, 0});

    const ParamVector ties = make_params({1, 1, 1, 1});
    const Mask mt = gen_mask({MaskKind::magnitude, 0.5}, ties, 0, 0, 1);
    CHECK(bits_of(mt) == std::vector<std::uint8_t>{1, 1, 0, 0});
}

TEST_CASE("static subnet keeps the leading block, independent of round") {
    const ParamVector theta = random_theta(4, 1);
    const MaskStrategy s{MaskKind::static_subnet, 0.5};
    CHECK(bits_of(gen_mask(s, theta, 0, 0, 1)) == std::vector<std::uint8_t>{1, 1, 0, 0});
    CHECK(bits_of(gen_mask(s, theta, 3, 7, 9)) == std::vector<std::uint8_t>{1, 1, 0, 0});
}

TEST_CASE("rolling subnet advances by its width with wraparound") {
    const ParamVector theta = random_theta(4, 2);
    const MaskStrategy s{MaskKind::rolling_subnet, 0.5};
    CHECK(bits_of(gen_mask(s, theta, 0, 0, 1)) == std::vector<std::uint8_t>{1, 1, 0, 0});
    CHECK(bits_of(gen_mask(s, theta, 0, 1, 1)) == std::vector<std::uint8_t>{0, 0, 1, 1});
    // offset (2*2) mod 4 wraps back to the leading block
    CHECK(bits_of(gen_mask(s, theta, 0, 2, 1)) == std::vector<std::uint8_t>{1, 1, 0, 0});

    // odd length exercises the wrap mid-block
    const ParamVector five = random_theta(5, 3);
    const MaskStrategy s5{MaskKind::rolling_subnet, 0.6};  // keeps 3
    CHECK(bits_of(gen_mask(s5, five, 0, 1, 1)) == std::vector<std::uint8_t>{1, 0, 0, 1, 1});
}

TEST_CASE("rolling subnet covers everything within 1/beta consecutive rounds") {
    Rng rng(4);
    for (std::size_t denom = 2; denom <= 5; ++denom) {
        const std::size_t len = 4 + rng.next_index(61);
        const ParamVector theta = random_theta(len, denom);
        const MaskStrategy s{MaskKind::rolling_subnet, 1.0 / static_cast<double>(denom)};
        for (std::size_t start_round = 0; start_round < 6; ++start_round) {
            std::vector<std::uint8_t> covered(len, 0);
            for (std::size_t r = 0; r < denom; ++r) {
                const Mask m = gen_mask(s, theta, 0, start_round + r, 1);
                for (std::size_t i = 0; i < len; ++i) covered[i] |= m.bits[i];
            }
            for (std::size_t i = 0; i < len; ++i) CHECK(covered[i] == 1);
        }
    }
}

TEST_CASE("random masks are deterministic per (client, round) stream") {
    const ParamVector theta = random_theta(12, 5);
    const MaskStrategy s{MaskKind::random, 0.5};
    const Mask a = gen_mask(s, theta, 2, 3, 42);
    const Mask b = gen_mask(s, theta, 2, 3, 42);
    CHECK(a.bits == b.bits);
    const Mask other_round = gen_mask(s, theta, 2, 4, 42);
    const Mask other_client = gen_mask(s, theta, 3, 3, 42);
    CHECK(a.bits != other_round.bits);  // new draw per round
    CHECK(a.bits != other_client.bits);
}

TEST_CASE("coverage-optimized masks tile regions by group offset") {
    const ParamVector theta = random_theta(8, 6);
    const Mask first = gen_mask({MaskKind::coverage_optimized, 0.5, 0}, theta, 0, 0, 1);
    const Mask second = gen_mask({MaskKind::coverage_optimized, 0.5, 1}, theta, 1, 0, 1);
    CHECK(bits_of(first) == std::vector<std::uint8_t>{1, 1, 1, 1, 0, 0, 0, 0});
    CHECK(bits_of(second) == std::vector<std::uint8_t>{0, 0, 0, 0, 1, 1, 1, 1});
    // offsets wrap modulo the region count
    const Mask wrapped = gen_mask({MaskKind::coverage_optimized, 0.5, 2}, theta, 2, 0, 1);
    CHECK(wrapped.bits == first.bits);
}

TEST_CASE("every strategy hits the exact per-layer keep count") {
    auto layout = make_layout({LayerInfo{"a", 0, 7}, LayerInfo{"b", 7, 12}});
    ParamVector theta = zeros_like(layout);
    Rng rng(8);
    for (auto& v : theta.values) v = rng.next_gaussian();
    for (MaskKind kind : {MaskKind::magnitude, MaskKind::static_subnet, MaskKind::rolling_subnet,
                          MaskKind::random, MaskKind::coverage_optimized}) {
        for (double beta : {0.25, 0.4, 0.5, 0.75, 1.0}) {
            for (std::size_t round = 0; round < 3; ++round) {
                const Mask m = gen_mask({kind, beta, 1}, theta, 1, round, 17);
                for (const auto& layer : layout->layers()) {
                    std::size_t ones = 0;
                    for (std::size_t i = 0; i < layer.length; ++i) ones += m.bits[layer.offset + i];
                    CHECK(ones == keep_count(beta, layer.length));
                }
            }
        }
    }
}

TEST_CASE("output layers are exempt from reduction when keep_output is set") {
    auto layout = make_layout({LayerInfo{"hidden", 0, 8, false}, LayerInfo{"out", 8, 4, true}});
    ParamVector theta = zeros_like(layout);
    for (std::size_t i = 0; i < theta.size(); ++i) theta.values[i] = static_cast<double>(i + 1);

    const Mask kept = gen_mask({MaskKind::static_subnet, 0.5, 0, true}, theta, 0, 0, 1);
    for (std::size_t i = 8; i < 12; ++i) CHECK(kept.bits[i] == 1);
    CHECK(kept.ones() == 4 + 4);

    const Mask reduced = gen_mask({MaskKind::static_subnet, 0.5, 0, false}, theta, 0, 0, 1);
    std::size_t out_ones = 0;
    for (std::size_t i = 8; i < 12; ++i) out_ones += reduced.bits[i];
    CHECK(out_ones == 2);
}

TEST_CASE("gen_mask validates its strategy") {
    const ParamVector theta = random_theta(4, 9);
    CHECK_THROWS_AS(gen_mask({MaskKind::magnitude, 0.0}, theta, 0, 0, 1), ConfigError);
    CHECK_THROWS_AS(gen_mask({MaskKind::magnitude, 1.5}, theta, 0, 0, 1), ConfigError);
    CHECK_THROWS_AS(gen_mask({MaskKind::full, 0.5}, theta, 0, 0, 1), ConfigError);
}

TEST_CASE("coverage counts match the spec examples") {
    auto layout = make_flat_layout(3);
    const std::vector<Mask> masks = {
        Mask{layout, {1, 1, 0}}, Mask{layout, {0, 1, 1}}, Mask{layout, {1, 0, 1}}};
    const CoverageReport rep = coverage(masks);
    CHECK(rep.per_param_counts == std::vector<int>{2, 2, 2});
    CHECK(rep.gamma_min_round == 2);

    auto l2 = make_flat_layout(2);
    const CoverageReport single = coverage({Mask{l2, {1, 0}}});
    CHECK(single.gamma_min_round == 0);
    CHECK(single.min_param_index == 1);
    // over the union support (the largest common model) the coordinate that
    // is covered counts once
    CHECK(single.effective_gamma_min == 1);

    std::vector<Mask> all_ones(5, full_mask(layout));
    CHECK(coverage(all_ones).gamma_min_round == 5);
    CHECK(coverage(all_ones).effective_gamma_min == 5);

    CHECK_THROWS_AS(coverage({}), ConfigError);
}

TEST_CASE("coverage agrees with brute-force counting on random mask sets") {
    Rng rng(123);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t len = 1 + rng.next_index(64);
        const std::size_t n = 1 + rng.next_index(16);
        auto layout = make_flat_layout(len);
        std::vector<Mask> masks;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::uint8_t> bits(len);
            for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_index(2));
            masks.push_back(Mask{layout, std::move(bits)});
        }
        const CoverageReport rep = coverage(masks);
        const std::vector<int> expect = oracle::count_coverage(masks);
        CHECK(rep.per_param_counts == expect);
        CHECK(rep.gamma_min_round == *std::min_element(expect.begin(), expect.end()));
    }
}

TEST_CASE("optimize_assignment reproduces the 4-full/6-half coverage jump") {
    auto layout = make_flat_layout(20);
    std::vector<double> caps(10, 1.0);
    for (std::size_t i = 4; i < 10; ++i) caps[i] = 0.5;

    // identical leading-block subnets as the baseline
    ParamVector probe = zeros_like(layout);
    std::vector<Mask> baseline;
    for (std::size_t c = 0; c < 10; ++c) {
        const MaskStrategy s{caps[c] == 1.0 ? MaskKind::full : MaskKind::static_subnet, caps[c]};
        baseline.push_back(gen_mask(s, probe, c, 0, 1));
    }
    CHECK(coverage(baseline).gamma_min_round == 4);

    const AssignmentResult optimized = optimize_assignment(caps, layout);
    CHECK(optimized.full_coverage);
    std::vector<Mask> tiled;
    for (std::size_t c = 0; c < 10; ++c) {
        tiled.push_back(gen_mask(optimized.plan[c], probe, c, 0, 1));
    }
    CHECK(coverage(tiled).gamma_min_round == 7);
}

TEST_CASE("optimize_assignment degenerate and small cases") {
    auto layout = make_flat_layout(6);
    ParamVector probe = zeros_like(layout);

    // all full: coverage is the client count no matter what
    const AssignmentResult full = optimize_assignment({1.0, 1.0, 1.0}, layout);
    std::vector<Mask> masks;
    for (std::size_t c = 0; c < 3; ++c) masks.push_back(gen_mask(full.plan[c], probe, c, 0, 1));
    CHECK(coverage(masks).gamma_min_round == 3);

    // two half clients tile to gamma 1; identical offsets would leave 0
    const AssignmentResult halves = optimize_assignment({0.5, 0.5}, layout);
    masks.clear();
    for (std::size_t c = 0; c < 2; ++c) masks.push_back(gen_mask(halves.plan[c], probe, c, 0, 1));
    CHECK(coverage(masks).gamma_min_round == 1);
    CHECK(halves.full_coverage);
    std::vector<Mask> identical(2, gen_mask({MaskKind::coverage_optimized, 0.5, 0}, probe, 0, 0, 1));
    CHECK(coverage(identical).gamma_min_round == 0);

    // a lone half client cannot cover everything: flagged
    const AssignmentResult lone = optimize_assignment({0.5}, layout);
    CHECK_FALSE(lone.full_coverage);
}

TEST_CASE("optimize_assignment never trails the identical-offset baseline") {
    Rng rng(55);
    auto layout = make_flat_layout(24);
    ParamVector probe = zeros_like(layout);
    const double levels[] = {1.0, 0.75, 0.5, 0.25};
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng.next_index(9);
        std::vector<double> caps(n);
        for (auto& b : caps) b = levels[rng.next_index(4)];
        std::vector<Mask> baseline, tiled;
        const AssignmentResult opt = optimize_assignment(caps, layout);
        for (std::size_t c = 0; c < n; ++c) {
            const MaskStrategy s{caps[c] == 1.0 ? MaskKind::full : MaskKind::static_subnet, caps[c]};
            baseline.push_back(gen_mask(s, probe, c, 0, 1));
            tiled.push_back(gen_mask(opt.plan[c], probe, c, 0, 1));
        }
        CHECK(coverage(tiled).gamma_min_round >= coverage(baseline).gamma_min_round);
    }
}

TEST_CASE("magnitude masks minimize reduction noise among equal-density masks") {
    Rng rng(91);
    for (std::size_t len = 1; len <= 12; ++len) {
        const ParamVector theta = random_theta(len, 1000 + len);
        for (std::size_t k = 1; k <= len; ++k) {
            const double beta = static_cast<double>(k) / static_cast<double>(len);
            const Mask best = gen_mask({MaskKind::magnitude, beta}, theta, 0, 0, 1);
            REQUIRE(best.ones() == k);
            const double best_noise = reduction_noise(theta, best);
            for (const auto& bits : oracle::masks_with_popcount(len, k)) {
                const Mask candidate{theta.layout, bits};
                CHECK(best_noise <= reduction_noise(theta, candidate));
            }
        }
    }
}

TEST_CASE("check_noise_bound flags masks that break the bound") {
    const ParamVector theta = make_params({1, 1, 1, 1});
    auto layout = theta.layout;
    const Mask half = gen_mask({MaskKind::magnitude, 0.5}, theta, 0, 0, 1);
    const ReductionNoiseReport rep = check_noise_bound(theta, {full_mask(layout), half}, 0.3);
    CHECK(rep.per_client[0] == 0.0);
    CHECK(rep.per_client[1] == 0.5);
    CHECK(rep.max_ratio == 0.5);
    CHECK(rep.flagged == std::vector<std::size_t>{1});

    const ReductionNoiseReport ok = check_noise_bound(theta, {full_mask(layout)}, 0.0);
    CHECK(ok.flagged.empty());
    CHECK_THROWS_AS(check_noise_bound(theta, {half}, 1.0), ConfigError);
}

TEST_CASE("magnitude noise never exceeds random-mask noise at equal density") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t len = 2 + rng.next_index(30);
        const ParamVector theta = random_theta(len, 5000 + trial);
        const double beta = 0.5;
        const Mask mag = gen_mask({MaskKind::magnitude, beta}, theta, 0, 0, 7);
        const Mask rnd = gen_mask({MaskKind::random, beta}, theta, trial, trial, 7);
        CHECK(reduction_noise(theta, mag) <= reduction_noise(theta, rnd));
    }
}
