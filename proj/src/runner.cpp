#include "hetfl/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>

namespace hetfl {

std::string resolve_output_dir(const ExperimentConfig& cfg, const std::string& cli_override) {
    std::string dir = cli_override.empty() ? cfg.output_dir : cli_override;
    if (const char* root = std::getenv("HETFL_OUT_ROOT"); root && *root) {
        return (std::filesystem::path(root) / dir).string();
    }
    return dir;
}

RunFiles run_to_files(const ExperimentConfig& cfg, const std::string& out_dir) {
    RunFiles files;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        RunResult result = run_experiment(cfg, r);
        const std::string csv_path =
            (std::filesystem::path(out_dir) / (cfg.name + "_seed" + std::to_string(r) + ".csv"))
                .string();
        write_round_csv(csv_path, result.records);
        files.csv_paths.push_back(csv_path);
        files.summaries.push_back(std::move(result.summary));
    }
    files.summary_path =
        (std::filesystem::path(out_dir) / (cfg.name + "_summary.json")).string();
    write_text_file(files.summary_path, aggregate_summary_json(cfg, files.summaries).dump(2) + "\n");
    return files;
}

namespace {

void require_comparable(const std::vector<ExperimentConfig>& cfgs) {
    if (cfgs.size() < 2) throw ConfigError("compare needs at least two configs");
    const auto first = resolved_json(cfgs.front());
    for (std::size_t i = 1; i < cfgs.size(); ++i) {
        const auto other = resolved_json(cfgs[i]);
        for (const char* section : {"model", "dataset", "schedule", "seeds"}) {
            if (first.at(section) != other.at(section)) {
                throw ConfigError("configs are not comparable: section '" + std::string(section) +
                                  "' differs between '" + cfgs.front().name + "' and '" +
                                  cfgs[i].name + "'");
            }
        }
    }
}

}  // namespace

CompareResult compare_experiments(const std::vector<ExperimentConfig>& cfgs) {
    require_comparable(cfgs);
    CompareResult result;
    for (const auto& cfg : cfgs) {
        CompareRow row;
        row.name = cfg.name;
        std::vector<double> losses, accs, grads;
        int gamma_min = 0;
        bool first_seed = true;
        for (std::size_t r = 0; r < cfg.repeats; ++r) {
            const RunResult run = run_experiment(cfg, r);
            const RunSummary& s = run.summary;
            losses.push_back(s.final_loss);
            grads.push_back(s.avg_grad_sqnorm);
            if (s.final_accuracy >= 0.0) accs.push_back(s.final_accuracy);
            gamma_min = first_seed ? s.gamma_min_running : std::min(gamma_min, s.gamma_min_running);
            first_seed = false;
            row.delta_sq_max = std::max(row.delta_sq_max, s.delta_sq_max);
            row.param_fraction = s.param_fraction;
        }
        row.gamma_min = gamma_min;
        row.final_loss = mean_stdev(losses);
        row.avg_grad_sqnorm = mean_stdev(grads);
        if (!accs.empty()) {
            row.final_accuracy = mean_stdev(accs);
            row.has_accuracy = true;
        }
        result.rows.push_back(std::move(row));
    }
    for (auto& row : result.rows) {
        row.d_loss_vs_first = row.final_loss.mean - result.rows.front().final_loss.mean;
        if (row.has_accuracy && result.rows.front().has_accuracy) {
            row.d_accuracy_vs_first =
                row.final_accuracy.mean - result.rows.front().final_accuracy.mean;
        }
    }

    std::string csv =
        "config,gamma_min,delta_sq_max,param_fraction,final_loss_mean,final_loss_stdev,"
        "final_accuracy_mean,final_accuracy_stdev,avg_grad_sqnorm_mean,avg_grad_sqnorm_stdev,"
        "d_loss_vs_first,d_accuracy_vs_first\n";
    for (const auto& r : result.rows) {
        csv += r.name + ',' + std::to_string(r.gamma_min) + ',' + format_double(r.delta_sq_max) +
               ',' + format_double(r.param_fraction) + ',' + format_double(r.final_loss.mean) + ',' +
               format_double(r.final_loss.stdev) + ',' +
               (r.has_accuracy ? format_double(r.final_accuracy.mean) : "-1") + ',' +
               (r.has_accuracy ? format_double(r.final_accuracy.stdev) : "0") + ',' +
               format_double(r.avg_grad_sqnorm.mean) + ',' + format_double(r.avg_grad_sqnorm.stdev) +
               ',' + format_double(r.d_loss_vs_first) + ',' + format_double(r.d_accuracy_vs_first) +
               '\n';
    }
    result.csv = csv;

    std::string table;
    table += "config                      Gmin  delta^2  %param   loss(mean+/-sd)        dLoss";
    if (result.rows.front().has_accuracy) table += "      acc(mean+/-sd)        dAcc";
    table += '\n';
    for (const auto& r : result.rows) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-26s %4d  %7.4f  %6.3f   %9.6f +/- %8.6f  %+8.5f",
                      r.name.c_str(), r.gamma_min, r.delta_sq_max, r.param_fraction,
                      r.final_loss.mean, r.final_loss.stdev, r.d_loss_vs_first);
        table += line;
        if (r.has_accuracy) {
            std::snprintf(line, sizeof(line), "   %7.4f +/- %6.4f  %+7.4f", r.final_accuracy.mean,
                          r.final_accuracy.stdev, r.d_accuracy_vs_first);
            table += line;
        }
        table += '\n';
    }
    result.table = table;
    return result;
}

std::vector<CoverageRow> coverage_probe(const ExperimentConfig& cfg, std::size_t rounds) {
    if (rounds < 1) throw ConfigError("coverage probe needs rounds >= 1");
    BuiltExperiment built = build_experiment(cfg, 0);
    std::vector<CoverageRow> out;
    int running = 0;
    for (std::size_t q = 0; q < rounds; ++q) {
        std::vector<Mask> masks;
        masks.reserve(built.clients.size());
        CoverageRow row;
        row.round = q + 1;
        for (const auto& c : built.clients) {
            masks.push_back(gen_mask(c.strategy, built.theta0, c.id, q, built.run_seed));
            row.delta_sq_per_client.push_back(reduction_noise(built.theta0, masks.back()));
        }
        const CoverageReport cov = coverage(masks);
        row.gamma_min_round = cov.gamma_min_round;
        row.effective_gamma_min = cov.effective_gamma_min;
        row.min_param_index = cov.min_param_index;
        running = q == 0 ? cov.gamma_min_round : std::min(running, cov.gamma_min_round);
        row.gamma_min_running = running;
        out.push_back(std::move(row));
    }
    return out;
}

std::string coverage_csv(const std::vector<CoverageRow>& rows) {
    std::string out = "round,param_index_min,gamma_min_round,gamma_min_running";
    if (!rows.empty()) {
        for (std::size_t c = 0; c < rows.front().delta_sq_per_client.size(); ++c) {
            out += ",delta_sq_client_" + std::to_string(c);
        }
    }
    out += '\n';
    for (const auto& r : rows) {
        out += std::to_string(r.round) + ',' + std::to_string(r.min_param_index) + ',' +
               std::to_string(r.gamma_min_round) + ',' + std::to_string(r.gamma_min_running);
        for (double d : r.delta_sq_per_client) {
            out += ',';
            out += format_double(d);
        }
        out += '\n';
    }
    return out;
}

}  // namespace hetfl
