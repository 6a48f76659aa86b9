#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef HETFL_CLI_PATH
#define HETFL_CLI_PATH "hetfl"
#endif

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HETFL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path write_small_config() {
    const fs::path dir = fs::temp_directory_path() / "hetfl_cli_tests";
    fs::create_directories(dir);
    const fs::path path = dir / "small.json";
    std::ofstream out(path);
    out << R"({
        "name": "cli-smoke",
        "model": {"kind": "logistic"},
        "dataset": {"kind": "blobs", "samples": 60, "dim": 4, "classes": 3},
        "clients": {"count": 3, "capacity": [1.0, 0.5, 0.5], "strategy":
                    ["full", "coverage-optimized", "coverage-optimized"]},
        "schedule": {"rounds": 3, "local_epochs": 2, "gamma": 0.2},
        "output": {"dir": ")" + (dir / "out").string() + R"("}
    })";
    return path;
}

}  // namespace

TEST_CASE("cli smoke: help, dry-run, run, coverage, and error exits") {
    const fs::path cfg = write_small_config();
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("run " + cfg.string() + " --dry-run") == 0);
    CHECK(run_cli("validate " + cfg.string()) == 0);
    CHECK(run_cli("run " + cfg.string()) == 0);
    CHECK(run_cli("coverage " + cfg.string() + " --rounds 2") == 0);

    const fs::path dir = cfg.parent_path();
    CHECK(fs::exists(dir / "out" / "cli-smoke_seed0.csv"));
    CHECK(fs::exists(dir / "out" / "cli-smoke_summary.json"));
    CHECK(fs::exists(dir / "out" / "cli-smoke_coverage.csv"));

    // validation failures exit 2, missing files exit 4
    const fs::path bad = dir / "bad.json";
    {
        std::ofstream out(bad);
        out << R"({"model": {"kind": "logistic"}, "dataset": {"kind": "blobs"},
                   "clients": {"count": 0}})";
    }
    CHECK(run_cli("run " + bad.string()) == 2);
    CHECK(run_cli("run " + (dir / "missing.json").string()) == 4);
    CHECK(run_cli("definitely-not-a-verb") == 2);
}

TEST_CASE("cli compare writes the side-by-side table") {
    const fs::path dir = fs::temp_directory_path() / "hetfl_cli_tests";
    fs::create_directories(dir);
    const auto body = [&](const std::string& name, const std::string& strategy) {
        return std::string(R"({
            "name": ")") + name + R"(",
            "model": {"kind": "logistic"},
            "dataset": {"kind": "blobs", "samples": 60, "dim": 4, "classes": 3},
            "clients": {"count": 4, "capacity": [1.0, 1.0, 0.5, 0.5], "strategy": ")" + strategy +
               R"("},
            "schedule": {"rounds": 3, "local_epochs": 2, "gamma": 0.2},
            "output": {"dir": ")" + (dir / "cmp").string() + R"("}
        })";
    };
    const fs::path a = dir / "a.json";
    const fs::path b = dir / "b.json";
    {
        std::ofstream out(a);
        out << body("identical", "static-subnet");
    }
    {
        std::ofstream out(b);
        out << body("tiled", "coverage-optimized");
    }
    const std::string cmd = std::string(HETFL_CLI_PATH) + " compare " + a.string() + " " +
                            b.string() + " >/dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(dir / "cmp" / "compare.csv"));
}
