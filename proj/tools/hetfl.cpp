#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetfl/runner.hpp"

namespace {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const hetfl::DivergenceError*>(&e)) return 3;
    if (dynamic_cast<const hetfl::NumericError*>(&e)) return 3;
    if (dynamic_cast<const hetfl::IoError*>(&e)) return 4;
    if (dynamic_cast<const hetfl::FormatError*>(&e)) return 4;
    if (dynamic_cast<const hetfl::ConsistencyError*>(&e)) return 4;
    return 2;  // validation / config problems
}

int do_run(const std::string& cfg_path, const std::string& out_override, std::size_t threads,
           bool dry_run) {
    hetfl::ExperimentConfig cfg = hetfl::parse_config(cfg_path);
    if (threads > 0) cfg.schedule.threads = threads;
    if (dry_run) {
        std::cout << hetfl::resolved_json(cfg).dump(2) << "\n";
        return 0;
    }
    const std::string out = hetfl::resolve_output_dir(cfg, out_override);
    const hetfl::RunFiles files = hetfl::run_to_files(cfg, out);
    for (const auto& p : files.csv_paths) std::cout << "wrote " << p << "\n";
    std::cout << "wrote " << files.summary_path << "\n";
    const auto& last = files.summaries.back();
    std::printf("final loss %.6g", last.final_loss);
    if (last.final_accuracy >= 0.0) std::printf(", accuracy %.4f", last.final_accuracy);
    std::printf(", gamma_min %d, max delta^2 %.4f\n", last.gamma_min_running, last.delta_sq_max);
    return 0;
}

int do_compare(const std::vector<std::string>& paths, const std::string& out_override) {
    std::vector<hetfl::ExperimentConfig> cfgs;
    cfgs.reserve(paths.size());
    for (const auto& p : paths) cfgs.push_back(hetfl::parse_config(p));
    const hetfl::CompareResult result = hetfl::compare_experiments(cfgs);
    const std::string out = hetfl::resolve_output_dir(cfgs.front(), out_override);
    const std::string csv_path = (std::filesystem::path(out) / "compare.csv").string();
    hetfl::write_text_file(csv_path, result.csv);
    std::cout << result.table;
    std::cout << "wrote " << csv_path << "\n";
    return 0;
}

int do_coverage(const std::string& cfg_path, const std::string& out_override, std::size_t rounds) {
    hetfl::ExperimentConfig cfg = hetfl::parse_config(cfg_path);
    const auto rows = hetfl::coverage_probe(cfg, rounds);
    const std::string out = hetfl::resolve_output_dir(cfg, out_override);
    const std::string path = (std::filesystem::path(out) / (cfg.name + "_coverage.csv")).string();
    hetfl::write_text_file(path, hetfl::coverage_csv(rows));
    for (const auto& r : rows) {
        double dmax = 0.0;
        for (double d : r.delta_sq_per_client) dmax = std::max(dmax, d);
        std::printf("round %zu: gamma_min %d (running %d), first min-coverage param %zu, max delta^2 %.4f",
                    r.round, r.gamma_min_round, r.gamma_min_running, r.min_param_index, dmax);
        if (r.effective_gamma_min != r.gamma_min_round) {
            std::printf(" [largest common model covered %d-fold]", r.effective_gamma_min);
        }
        std::printf("\n");
    }
    std::cout << "wrote " << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hetfl - federated learning with reduced client submodels"};
    app.require_subcommand(1);

    std::string cfg_path;
    std::string out_override;
    std::size_t threads = 0;
    bool dry_run = false;
    std::vector<std::string> compare_paths;
    std::size_t coverage_rounds = 1;

    auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("config", cfg_path, "config file")->required();
    run->add_option("--out", out_override, "output directory (overrides the config)");
    run->add_option("--threads", threads, "concurrent client training threads");
    run->add_flag("--dry-run", dry_run, "validate, print the resolved config, run nothing");

    auto* validate = app.add_subcommand("validate", "validate a config and print it resolved");
    validate->add_option("config", cfg_path, "config file")->required();

    auto* compare = app.add_subcommand("compare", "run configs side by side on the same seeds");
    compare->add_option("configs", compare_paths, "two or more config files")
        ->required()
        ->expected(2, -1);
    compare->add_option("--out", out_override, "output directory (overrides the first config)");

    auto* coverage = app.add_subcommand("coverage", "print the coverage report without training");
    coverage->add_option("config", cfg_path, "config file")->required();
    coverage->add_option("--rounds", coverage_rounds, "rounds of masks to probe");
    coverage->add_option("--out", out_override, "output directory (overrides the config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return do_run(cfg_path, out_override, threads, dry_run);
        if (validate->parsed()) return do_run(cfg_path, out_override, threads, true);
        if (compare->parsed()) return do_compare(compare_paths, out_override);
        if (coverage->parsed()) return do_coverage(cfg_path, out_override, coverage_rounds);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 0;
}
