#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hetfl/config.hpp"
#include "hetfl/runner.hpp"

using namespace hetfl;

namespace {

nlohmann::json minimal_config() {
    return nlohmann::json::parse(R"({
        "model": {"kind": "logistic"},
        "dataset": {"kind": "blobs", "samples": 100, "dim": 4, "classes": 3},
        "clients": {"count": 5}
    })");
}

std::string write_config(const nlohmann::json& j, const std::string& name) {
    const auto path = std::filesystem::temp_directory_path() / "hetfl_config_tests" / name;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << j.dump(2);
    return path.string();
}

}  // namespace

TEST_CASE("minimal config resolves the documented defaults") {
    const ExperimentConfig cfg = parse_config_json(minimal_config(), "test");
    CHECK(cfg.schedule.rounds == 100);
    CHECK(cfg.schedule.local_epochs == 5);
    CHECK(cfg.batch_size == 10);
    CHECK(cfg.schedule.participation == 1.0);
    CHECK(cfg.schedule.lr_policy == LrPolicy::theorem_iid);
    CHECK(cfg.repeats == 1);
    CHECK(cfg.clients.capacities == std::vector<double>(5, 1.0));
    CHECK(cfg.clients.kinds == std::vector<MaskKind>(5, MaskKind::full));
    CHECK(cfg.model.input_dim == 4);   // filled from the dataset
    CHECK(cfg.model.class_count == 3);

    // and the dry-run view spells all of them out
    const auto resolved = resolved_json(cfg);
    CHECK(resolved["schedule"]["rounds"] == 100);
    CHECK(resolved["schedule"]["local_epochs"] == 5);
    CHECK(resolved["schedule"]["batch_size"] == 10);
    CHECK(resolved["schedule"]["gamma"] == "theorem-iid");
    CHECK(resolved["schedule"]["sampling"] == "epoch");
    CHECK(resolved["schedule"]["momentum"] == 0.0);
    CHECK(resolved["clients"]["keep_output"] == true);
    CHECK(resolved["seeds"]["master"] == 1);
}

TEST_CASE("zero capacity is rejected") {
    auto j = minimal_config();
    j["clients"]["capacity"] = {1.0, 1.0, 0.0, 1.0, 1.0};
    CHECK_THROWS_AS(parse_config_json(j, "test"), ConfigError);
}

TEST_CASE("unknown keys are named with a suggestion") {
    auto j = minimal_config();
    j["schedule"] = {{"gama", 0.1}};
    try {
        parse_config_json(j, "test");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("gama") != std::string::npos);
        CHECK(msg.find("did you mean 'gamma'") != std::string::npos);
    }
}

TEST_CASE("all validation problems are reported together") {
    auto j = minimal_config();
    j["clients"]["capacity"] = {2.0, 1.0};  // wrong length AND out of range
    j["schedule"] = {{"rounds", 0}, {"gamma", -1.0}};
    try {
        parse_config_json(j, "test");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.details.size() >= 3);
    }
}

TEST_CASE("codenames expand to capacity profiles with region offsets") {
    const CodenameProfile p = parse_codename("1111234444");
    CHECK(p.capacities ==
          std::vector<double>{1, 1, 1, 1, 0.75, 0.75, 0.75, 0.75, 0.75, 0.75});
    CHECK(p.group_offsets == std::vector<std::size_t>{0, 0, 0, 0, 0, 1, 2, 2, 2, 2});
    CHECK(parse_codename("157").capacities == std::vector<double>{1, 0.5, 0.5});
    CHECK_THROWS_AS(parse_codename("1108"), ConfigError);
    CHECK_THROWS_AS(parse_codename(""), ConfigError);

    auto j = minimal_config();
    j["clients"] = {{"codename", "1111444444"}};
    const ExperimentConfig cfg = parse_config_json(j, "test");
    CHECK(cfg.clients.count == 10);
    CHECK(cfg.clients.kinds[0] == MaskKind::full);
    CHECK(cfg.clients.kinds[5] == MaskKind::coverage_optimized);

    j["clients"] = {{"codename", "1111444444"}, {"count", 9}};
    CHECK_THROWS_AS(parse_config_json(j, "test"), ConfigError);
}

TEST_CASE("strategy lists and scalars resolve per client") {
    auto j = minimal_config();
    j["clients"]["capacity"] = {1.0, 0.5, 0.5, 0.5, 0.5};
    j["clients"]["strategy"] = {"full", "magnitude", "random", "static-subnet", "rolling-subnet"};
    const ExperimentConfig cfg = parse_config_json(j, "test");
    CHECK(cfg.clients.kinds ==
          std::vector<MaskKind>{MaskKind::full, MaskKind::magnitude, MaskKind::random,
                                MaskKind::static_subnet, MaskKind::rolling_subnet});

    j["clients"]["strategy"] = "banana";
    CHECK_THROWS_AS(parse_config_json(j, "test"), ConfigError);

    // full strategy at reduced capacity is contradictory
    j["clients"]["strategy"] = "full";
    CHECK_THROWS_AS(parse_config_json(j, "test"), ConfigError);
}

TEST_CASE("dataset and model must agree") {
    auto j = minimal_config();
    j["model"] = {{"kind", "quadratic"}};
    CHECK_THROWS_AS(parse_config_json(j, "test"), ConfigError);  // quadratic on blobs

    auto q = nlohmann::json::parse(R"({
        "model": {"kind": "quadratic"},
        "dataset": {"kind": "quadratic", "dim": 6, "condition": 4.0,
                     "partition": {"kind": "label-skew", "max_labels": 2}},
        "clients": {"count": 2}
    })");
    CHECK_THROWS_AS(parse_config_json(q, "test"), ConfigError);  // label skew needs classes

    auto mlp = minimal_config();
    mlp["model"] = {{"kind", "mlp"}};  // missing hidden_dim
    CHECK_THROWS_AS(parse_config_json(mlp, "test"), ConfigError);

    auto idx = minimal_config();
    idx["dataset"] = {{"kind", "idx"}, {"images", "/no/such/images"}, {"labels", "/no/such/labels"}};
    CHECK_THROWS_AS(parse_config_json(idx, "test"), ConfigError);  // files must exist
}

TEST_CASE("parse_config reads files and reports bad JSON") {
    const std::string good = write_config(minimal_config(), "good.json");
    CHECK(parse_config(good).clients.count == 5);
    CHECK_THROWS_AS(parse_config("/no/such/config.json"), IoError);

    const auto bad = std::filesystem::temp_directory_path() / "hetfl_config_tests" / "bad.json";
    {
        std::ofstream out(bad);
        out << "{not json";
    }
    CHECK_THROWS_AS(parse_config(bad.string()), FormatError);
}

TEST_CASE("compare refuses configs whose shared sections differ") {
    auto a = minimal_config();
    auto b = minimal_config();
    b["schedule"] = {{"rounds", 7}};
    const ExperimentConfig ca = parse_config_json(a, "a");
    ExperimentConfig cb = parse_config_json(b, "b");
    cb.name = "other";
    CHECK_THROWS_AS(compare_experiments({ca, cb}), ConfigError);
    CHECK_THROWS_AS(compare_experiments({ca}), ConfigError);
}

TEST_CASE("compare reports the kept-parameter fraction that a recount gives") {
    auto j = minimal_config();
    j["schedule"] = {{"rounds", 2}, {"local_epochs", 1}, {"gamma", 0.1}};
    auto a = j;
    a["name"] = "full";
    auto b = j;
    b["name"] = "half";
    b["clients"]["capacity"] = {1.0, 1.0, 0.5, 0.5, 0.5};
    b["clients"]["strategy"] = {"full", "full", "coverage-optimized", "coverage-optimized",
                                 "coverage-optimized"};
    const ExperimentConfig ca = parse_config_json(a, "a");
    const ExperimentConfig cb = parse_config_json(b, "b");
    const CompareResult result = compare_experiments({ca, cb});
    REQUIRE(result.rows.size() == 2);
    CHECK(result.rows[0].param_fraction == 1.0);

    // independent recount: sum of kept bits over fresh round-0 masks
    const BuiltExperiment built = build_experiment(cb, cb.repeats - 1);
    std::size_t kept = 0;
    for (const auto& client : built.clients) {
        kept += gen_mask(client.strategy, built.theta0, client.id, 0, built.run_seed).ones();
    }
    const double expect = static_cast<double>(kept) /
                          static_cast<double>(built.theta0.size() * built.clients.size());
    CHECK(result.rows[1].param_fraction == expect);
    CHECK(result.rows[1].param_fraction < 1.0);

    // a config compared against itself has an all-zero delta column
    ExperimentConfig same = ca;
    same.name = "full-again";
    const CompareResult self_cmp = compare_experiments({ca, same});
    CHECK(self_cmp.rows[1].d_loss_vs_first == 0.0);
    CHECK(self_cmp.rows[1].d_accuracy_vs_first == 0.0);
}

TEST_CASE("environment variable overrides the output root") {
    ExperimentConfig cfg;
    cfg.output_dir = "results";
    setenv("HETFL_OUT_ROOT", "/tmp/hetfl_root", 1);
    CHECK(resolve_output_dir(cfg, "") == "/tmp/hetfl_root/results");
    CHECK(resolve_output_dir(cfg, "elsewhere") == "/tmp/hetfl_root/elsewhere");
    unsetenv("HETFL_OUT_ROOT");
    CHECK(resolve_output_dir(cfg, "") == "results");
}
