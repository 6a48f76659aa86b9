#include "hetfl/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace hetfl {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string round_records_csv(const std::vector<RoundRecord>& records) {
    std::string out = "round,loss,grad_sqnorm,accuracy,gamma_min,delta_sq_max,theta_sqnorm,active_clients\n";
    for (const auto& r : records) {
        out += std::to_string(r.round);
        out += ',';
        out += format_double(r.loss);
        out += ',';
        out += format_double(r.grad_sqnorm);
        out += ',';
        out += format_double(r.accuracy);
        out += ',';
        out += std::to_string(r.gamma_min_round);
        out += ',';
        out += format_double(r.delta_sq_max);
        out += ',';
        out += format_double(r.theta_sqnorm);
        out += ',';
        out += std::to_string(r.active_clients);
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("failed writing " + path);
}

void write_round_csv(const std::string& path, const std::vector<RoundRecord>& records) {
    write_text_file(path, round_records_csv(records));
}

nlohmann::ordered_json summary_to_json(const RunSummary& s) {
    nlohmann::ordered_json j;
    j["run_seed"] = s.run_seed;
    j["rounds"] = s.rounds;
    j["clients"] = s.clients;
    j["learning_rate"] = s.learning_rate;
    if (s.smoothness > 0.0) j["smoothness_estimate"] = s.smoothness;
    j["initial_loss"] = s.initial_loss;
    j["final_loss"] = s.final_loss;
    j["avg_grad_sqnorm"] = s.avg_grad_sqnorm;
    j["final_grad_sqnorm"] = s.final_grad_sqnorm;
    if (s.final_accuracy >= 0.0) j["final_accuracy"] = s.final_accuracy;
    if (s.local_accuracy >= 0.0) j["local_accuracy"] = s.local_accuracy;
    j["gamma_min"] = s.gamma_min_running;
    if (s.gamma_min_effective != s.gamma_min_running) {
        j["gamma_min_effective"] = s.gamma_min_effective;  // over the union support
    }
    j["delta_sq_max"] = s.delta_sq_max;
    j["grad_bound_estimate"] = s.grad_bound_estimate;
    j["grad_noise_estimate"] = s.grad_noise_estimate;
    if (s.optimality_gap != -1.0) j["optimality_gap"] = s.optimality_gap;
    j["param_fraction"] = s.param_fraction;
    if (!s.theory_notes.empty()) j["outside_theory"] = s.theory_notes;
    return j;
}

MeanStdev mean_stdev(const std::vector<double>& values) {
    MeanStdev out;
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - out.mean) * (v - out.mean);
        out.stdev = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
    return out;
}

nlohmann::ordered_json aggregate_summary_json(const ExperimentConfig& cfg,
                                              const std::vector<RunSummary>& summaries) {
    nlohmann::ordered_json j;
    j["name"] = cfg.name;
    j["repeats"] = summaries.size();
    std::vector<double> losses, accs, grads;
    int gamma_min = summaries.empty() ? 0 : summaries.front().gamma_min_running;
    double delta_max = 0.0;
    for (const auto& s : summaries) {
        losses.push_back(s.final_loss);
        grads.push_back(s.avg_grad_sqnorm);
        if (s.final_accuracy >= 0.0) accs.push_back(s.final_accuracy);
        gamma_min = std::min(gamma_min, s.gamma_min_running);
        delta_max = std::max(delta_max, s.delta_sq_max);
    }
    const MeanStdev loss_stats = mean_stdev(losses);
    j["final_loss"]["mean"] = loss_stats.mean;
    j["final_loss"]["stdev"] = loss_stats.stdev;
    if (!accs.empty()) {
        const MeanStdev acc_stats = mean_stdev(accs);
        j["final_accuracy"]["mean"] = acc_stats.mean;
        j["final_accuracy"]["stdev"] = acc_stats.stdev;
    }
    const MeanStdev grad_stats = mean_stdev(grads);
    j["avg_grad_sqnorm"]["mean"] = grad_stats.mean;
    j["avg_grad_sqnorm"]["stdev"] = grad_stats.stdev;
    j["gamma_min"] = gamma_min;
    j["delta_sq_max"] = delta_max;
    j["seeds"] = nlohmann::ordered_json::array();
    for (const auto& s : summaries) j["seeds"].push_back(summary_to_json(s));
    j["config"] = resolved_json(cfg);
    return j;
}

}  // namespace hetfl
