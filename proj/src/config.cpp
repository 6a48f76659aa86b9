#include "hetfl/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace hetfl {

namespace {

using nlohmann::json;

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

/// Collects validation problems; parsing keeps going so the final error
/// lists everything wrong with the file at once.
struct Problems {
    std::vector<std::string> list;
    void add(const std::string& msg) { list.push_back(msg); }
    bool empty() const { return list.empty(); }
};

void check_keys(const json& j, const std::string& where, const std::vector<std::string>& known,
                Problems& problems) {
    if (!j.is_object()) {
        problems.add(where + ": expected an object");
        return;
    }
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        if (std::find(known.begin(), known.end(), key) != known.end()) continue;
        std::string best;
        std::size_t best_dist = 4;  // only suggest close matches
        for (const auto& k : known) {
            const std::size_t d = edit_distance(key, k);
            if (d < best_dist) {
                best_dist = d;
                best = k;
            }
        }
        std::string msg = where + ": unknown key '" + key + "'";
        if (!best.empty()) msg += " (did you mean '" + best + "'?)";
        problems.add(msg);
    }
}

template <typename T>
bool fetch(const json& j, const std::string& where, const std::string& key, T& out,
           Problems& problems) {
    auto it = j.find(key);
    if (it == j.end()) return false;
    try {
        out = it->get<T>();
        return true;
    } catch (const json::exception&) {
        problems.add(where + "." + key + ": wrong type");
        return false;
    }
}

bool fetch_size(const json& j, const std::string& where, const std::string& key, std::size_t& out,
                Problems& problems) {
    auto it = j.find(key);
    if (it == j.end()) return false;
    if (!it->is_number_integer() || it->get<long long>() < 0) {
        problems.add(where + "." + key + ": expected a non-negative integer");
        return false;
    }
    out = it->get<std::size_t>();
    return true;
}

void parse_model(const json& j, ExperimentConfig& cfg, Problems& problems) {
    check_keys(j, "model", {"kind", "input_dim", "hidden_dim", "classes", "activation", "init_seed"},
               problems);
    if (!j.is_object()) return;
    std::string kind;
    if (!fetch(j, "model", "kind", kind, problems)) {
        problems.add("model.kind is required (quadratic | logistic | mlp)");
        return;
    }
    if (kind == "quadratic") cfg.model.kind = ModelKind::quadratic;
    else if (kind == "logistic") cfg.model.kind = ModelKind::logistic;
    else if (kind == "mlp") cfg.model.kind = ModelKind::mlp;
    else problems.add("model.kind: unknown kind '" + kind + "'");
    fetch_size(j, "model", "input_dim", cfg.model.input_dim, problems);
    fetch_size(j, "model", "hidden_dim", cfg.model.hidden_dim, problems);
    fetch_size(j, "model", "classes", cfg.model.class_count, problems);
    std::string act;
    if (fetch(j, "model", "activation", act, problems)) {
        if (act == "tanh") cfg.model.activation = Activation::tanh;
        else if (act == "relu") cfg.model.activation = Activation::relu;
        else problems.add("model.activation: expected tanh or relu, got '" + act + "'");
    }
    std::uint64_t seed = 0;
    if (fetch(j, "model", "init_seed", seed, problems)) cfg.model.init_seed = seed;
}

void parse_partition(const json& j, DatasetConfig& ds, Problems& problems) {
    check_keys(j, "dataset.partition", {"kind", "max_labels", "seed"}, problems);
    if (!j.is_object()) return;
    std::string kind;
    if (fetch(j, "dataset.partition", "kind", kind, problems)) {
        if (kind == "iid") ds.partition.kind = PartitionKind::iid;
        else if (kind == "label-skew") ds.partition.kind = PartitionKind::label_skew;
        else problems.add("dataset.partition.kind: expected iid or label-skew, got '" + kind + "'");
    }
    fetch_size(j, "dataset.partition", "max_labels", ds.partition.max_labels, problems);
    std::uint64_t seed = 0;
    if (fetch(j, "dataset.partition", "seed", seed, problems)) {
        ds.partition.seed = seed;
        ds.partition.seed_set = true;
    }
}

void parse_dataset(const json& j, ExperimentConfig& cfg, Problems& problems) {
    check_keys(j, "dataset",
               {"kind", "samples", "test_samples", "dim", "classes", "spread", "condition", "images",
                "labels", "test_images", "test_labels", "path", "test_path", "seed", "partition"},
               problems);
    if (!j.is_object()) return;
    auto& ds = cfg.dataset;
    std::string kind;
    if (!fetch(j, "dataset", "kind", kind, problems)) {
        problems.add("dataset.kind is required (quadratic | blobs | idx | csv)");
        return;
    }
    if (kind == "quadratic") ds.kind = DatasetKind::synthetic_quadratic;
    else if (kind == "blobs") ds.kind = DatasetKind::synthetic_blobs;
    else if (kind == "idx") ds.kind = DatasetKind::idx_images;
    else if (kind == "csv") ds.kind = DatasetKind::csv_table;
    else problems.add("dataset.kind: unknown kind '" + kind + "'");

    fetch_size(j, "dataset", "samples", ds.samples, problems);
    fetch_size(j, "dataset", "test_samples", ds.test_samples, problems);
    fetch_size(j, "dataset", "dim", ds.dim, problems);
    fetch_size(j, "dataset", "classes", ds.classes, problems);
    fetch(j, "dataset", "spread", ds.spread, problems);
    fetch(j, "dataset", "condition", ds.condition, problems);
    fetch(j, "dataset", "images", ds.images, problems);
    fetch(j, "dataset", "labels", ds.labels, problems);
    fetch(j, "dataset", "test_images", ds.test_images, problems);
    fetch(j, "dataset", "test_labels", ds.test_labels, problems);
    fetch(j, "dataset", "path", ds.path, problems);
    fetch(j, "dataset", "test_path", ds.test_path, problems);
    std::uint64_t seed = 0;
    if (fetch(j, "dataset", "seed", seed, problems)) {
        ds.seed = seed;
        ds.seed_set = true;
    }
    if (auto it = j.find("partition"); it != j.end()) parse_partition(*it, ds, problems);
}

void parse_clients(const json& j, ExperimentConfig& cfg, Problems& problems) {
    check_keys(j, "clients", {"count", "capacity", "codename", "strategy", "group_offsets", "keep_output"},
               problems);
    if (!j.is_object()) return;
    auto& cl = cfg.clients;
    fetch_size(j, "clients", "count", cl.count, problems);
    fetch(j, "clients", "keep_output", cl.keep_output, problems);

    const bool has_codename = j.contains("codename");
    const bool has_capacity = j.contains("capacity");
    if (has_codename && has_capacity) {
        problems.add("clients: give either 'codename' or 'capacity', not both");
    }
    if (has_codename) {
        fetch(j, "clients", "codename", cl.codename, problems);
        if (!cl.codename.empty()) {
            try {
                const CodenameProfile prof = parse_codename(cl.codename);
                cl.capacities = prof.capacities;
                cl.group_offsets = prof.group_offsets;
                cl.group_offsets_set = true;
                if (cl.count == 0) cl.count = cl.capacities.size();
                else if (cl.count != cl.capacities.size()) {
                    problems.add("clients.count (" + std::to_string(cl.count) +
                                 ") disagrees with codename length (" +
                                 std::to_string(cl.capacities.size()) + ")");
                }
            } catch (const ConfigError& e) {
                problems.add(std::string("clients.codename: ") + e.what());
            }
        }
    } else if (has_capacity) {
        const auto& cap = j.at("capacity");
        if (cap.is_number()) {
            if (cl.count == 0) problems.add("clients.count is required with a scalar capacity");
            cl.capacities.assign(cl.count, cap.get<double>());
        } else if (cap.is_array()) {
            for (const auto& v : cap) {
                if (!v.is_number()) {
                    problems.add("clients.capacity: entries must be numbers");
                    break;
                }
                cl.capacities.push_back(v.get<double>());
            }
            if (cl.count == 0) cl.count = cl.capacities.size();
        } else {
            problems.add("clients.capacity: expected a number or an array");
        }
    } else {
        if (cl.count == 0) problems.add("clients.count is required");
        cl.capacities.assign(cl.count, 1.0);
    }

    if (auto it = j.find("group_offsets"); it != j.end()) {
        if (has_codename) problems.add("clients.group_offsets conflicts with codename offsets");
        if (!it->is_array()) {
            problems.add("clients.group_offsets: expected an array");
        } else {
            cl.group_offsets.clear();
            for (const auto& v : *it) {
                if (!v.is_number_integer() || v.get<long long>() < 0) {
                    problems.add("clients.group_offsets: entries must be non-negative integers");
                    break;
                }
                cl.group_offsets.push_back(v.get<std::size_t>());
            }
            cl.group_offsets_set = true;
        }
    }

    // Strategy: one name for everyone or a per-client list. Defaults are
    // resolved after capacities are known.
    if (auto it = j.find("strategy"); it != j.end()) {
        auto apply_kind = [&](const std::string& name, std::size_t at) {
            try {
                const MaskKind k = mask_kind_from_name(name);
                if (at == cl.kinds.size()) cl.kinds.push_back(k);
                else cl.kinds[at] = k;
            } catch (const ConfigError& e) {
                problems.add(std::string("clients.strategy: ") + e.what());
            }
        };
        if (it->is_string()) {
            const std::string name = it->get<std::string>();
            for (std::size_t i = 0; i < cl.count; ++i) apply_kind(name, i);
        } else if (it->is_array()) {
            std::size_t i = 0;
            for (const auto& v : *it) {
                if (!v.is_string()) {
                    problems.add("clients.strategy: entries must be strings");
                    break;
                }
                apply_kind(v.get<std::string>(), i++);
            }
        } else {
            problems.add("clients.strategy: expected a string or an array of strings");
        }
    }
}

void parse_schedule(const json& j, ExperimentConfig& cfg, Problems& problems) {
    check_keys(j, "schedule",
               {"rounds", "local_epochs", "batch_size", "gamma", "participation", "momentum",
                "sampling", "threads"},
               problems);
    if (!j.is_object()) return;
    auto& s = cfg.schedule;
    fetch_size(j, "schedule", "rounds", s.rounds, problems);
    fetch_size(j, "schedule", "local_epochs", s.local_epochs, problems);
    fetch_size(j, "schedule", "batch_size", cfg.batch_size, problems);
    fetch(j, "schedule", "participation", s.participation, problems);
    fetch(j, "schedule", "momentum", s.momentum, problems);
    fetch_size(j, "schedule", "threads", s.threads, problems);
    if (auto it = j.find("gamma"); it != j.end()) {
        if (it->is_number()) {
            s.lr_policy = LrPolicy::fixed;
            s.lr_value = it->get<double>();
        } else if (it->is_string()) {
            const std::string p = it->get<std::string>();
            if (p == "theorem-iid") s.lr_policy = LrPolicy::theorem_iid;
            else if (p == "theorem-noniid") s.lr_policy = LrPolicy::theorem_noniid;
            else problems.add("schedule.gamma: expected a number, 'theorem-iid', or 'theorem-noniid'");
        } else {
            problems.add("schedule.gamma: expected a number or a policy name");
        }
    }
    std::string sampling;
    if (fetch(j, "schedule", "sampling", sampling, problems)) {
        if (sampling == "epoch") s.with_replacement = false;
        else if (sampling == "with-replacement") s.with_replacement = true;
        else problems.add("schedule.sampling: expected epoch or with-replacement");
    }
}

void parse_seeds(const json& j, ExperimentConfig& cfg, Problems& problems) {
    check_keys(j, "seeds", {"master", "repeats"}, problems);
    if (!j.is_object()) return;
    std::uint64_t master = 0;
    if (fetch(j, "seeds", "master", master, problems)) cfg.master_seed = master;
    fetch_size(j, "seeds", "repeats", cfg.repeats, problems);
}

void parse_output(const json& j, ExperimentConfig& cfg, Problems& problems) {
    check_keys(j, "output", {"dir"}, problems);
    if (!j.is_object()) return;
    fetch(j, "output", "dir", cfg.output_dir, problems);
}

bool classification_dataset(const DatasetConfig& ds) {
    return ds.kind != DatasetKind::synthetic_quadratic;
}

void cross_validate(ExperimentConfig& cfg, Problems& problems) {
    auto& cl = cfg.clients;
    if (cl.count < 1) problems.add("clients.count must be >= 1");
    if (!cl.capacities.empty() && cl.capacities.size() != cl.count) {
        problems.add("clients.capacity length (" + std::to_string(cl.capacities.size()) +
                     ") must equal clients.count (" + std::to_string(cl.count) + ")");
    }
    for (std::size_t i = 0; i < cl.capacities.size(); ++i) {
        const double b = cl.capacities[i];
        if (!(b > 0.0) || b > 1.0) {
            problems.add("clients.capacity[" + std::to_string(i) + "] = " + std::to_string(b) +
                         " is outside (0, 1]");
        }
    }
    if (!cl.kinds.empty() && cl.kinds.size() != cl.count) {
        problems.add("clients.strategy list length must equal clients.count");
    }
    if (cl.group_offsets_set && cl.group_offsets.size() != cl.count) {
        problems.add("clients.group_offsets length must equal clients.count");
    }
    // Default kinds: full at capacity 1, codename digits tile regions,
    // explicit capacities fall back to the leading static subnet.
    if (cl.kinds.empty() && cl.capacities.size() == cl.count) {
        const MaskKind partial_default =
            cl.codename.empty() ? MaskKind::static_subnet : MaskKind::coverage_optimized;
        for (double b : cl.capacities) {
            cl.kinds.push_back(b >= 1.0 ? MaskKind::full : partial_default);
        }
    }
    for (std::size_t i = 0; i < cl.kinds.size() && i < cl.capacities.size(); ++i) {
        if (cl.kinds[i] == MaskKind::full && cl.capacities[i] < 1.0) {
            problems.add("clients[" + std::to_string(i) + "]: full strategy forces capacity 1");
        }
    }

    const auto& s = cfg.schedule;
    if (s.rounds < 1) problems.add("schedule.rounds must be >= 1");
    if (s.local_epochs < 1) problems.add("schedule.local_epochs must be >= 1");
    if (cfg.batch_size < 1) problems.add("schedule.batch_size must be >= 1");
    if (s.lr_policy == LrPolicy::fixed && !(s.lr_value > 0.0)) {
        problems.add("schedule.gamma must be > 0 when fixed");
    }
    if (!(s.participation > 0.0) || s.participation > 1.0) {
        problems.add("schedule.participation must be in (0, 1]");
    }
    if (s.momentum < 0.0 || s.momentum >= 1.0) problems.add("schedule.momentum must be in [0, 1)");
    if (s.threads < 1) problems.add("schedule.threads must be >= 1");
    if (cfg.repeats < 1) problems.add("seeds.repeats must be >= 1");

    const auto& ds = cfg.dataset;
    switch (ds.kind) {
        case DatasetKind::synthetic_quadratic:
            if (ds.dim < 1) problems.add("dataset.dim is required for the quadratic kind");
            if (ds.condition < 1.0) problems.add("dataset.condition must be >= 1");
            if (cfg.model.kind != ModelKind::quadratic) {
                problems.add("quadratic dataset requires model.kind = quadratic");
            }
            break;
        case DatasetKind::synthetic_blobs:
            if (ds.samples < 1) problems.add("dataset.samples is required for the blobs kind");
            if (ds.dim < 1) problems.add("dataset.dim is required for the blobs kind");
            if (ds.classes < 2) problems.add("dataset.classes must be >= 2 for the blobs kind");
            if (ds.spread < 0.0) problems.add("dataset.spread must be >= 0");
            break;
        case DatasetKind::idx_images:
            if (ds.images.empty() || ds.labels.empty()) {
                problems.add("dataset.images and dataset.labels are required for the idx kind");
            }
            for (const std::string* p : {&ds.images, &ds.labels, &ds.test_images, &ds.test_labels}) {
                if (!p->empty() && !std::filesystem::exists(*p)) {
                    problems.add("dataset file not found: " + *p);
                }
            }
            if (ds.test_images.empty() != ds.test_labels.empty()) {
                problems.add("dataset.test_images and dataset.test_labels must be given together");
            }
            break;
        case DatasetKind::csv_table:
            if (ds.path.empty()) problems.add("dataset.path is required for the csv kind");
            for (const std::string* p : {&ds.path, &ds.test_path}) {
                if (!p->empty() && !std::filesystem::exists(*p)) {
                    problems.add("dataset file not found: " + *p);
                }
            }
            break;
    }
    if (cfg.model.kind == ModelKind::quadratic && ds.kind != DatasetKind::synthetic_quadratic) {
        problems.add("model.kind = quadratic requires dataset.kind = quadratic");
    }
    if (ds.partition.kind == PartitionKind::label_skew) {
        if (!classification_dataset(ds)) {
            problems.add("label-skew partition needs a classification dataset");
        }
        if (ds.partition.max_labels < 1) problems.add("dataset.partition.max_labels must be >= 1");
    }

    // Fill model dims from synthetic dataset shapes so minimal configs work.
    if (cfg.model.input_dim == 0 && ds.dim > 0) cfg.model.input_dim = ds.dim;
    if (cfg.model.class_count == 0 && ds.classes > 0) cfg.model.class_count = ds.classes;
    if (cfg.model.kind != ModelKind::quadratic) {
        if (ds.classes > 0 && cfg.model.class_count != ds.classes) {
            problems.add("model.classes disagrees with dataset.classes");
        }
        if (ds.kind == DatasetKind::synthetic_blobs && ds.dim > 0 && cfg.model.input_dim != ds.dim) {
            problems.add("model.input_dim disagrees with dataset.dim");
        }
    } else if (ds.dim > 0 && cfg.model.input_dim != ds.dim) {
        problems.add("model.input_dim disagrees with dataset.dim");
    }
    if (cfg.model.kind == ModelKind::mlp && cfg.model.hidden_dim == 0) {
        problems.add("model.hidden_dim is required for the mlp kind");
    }
    if (cfg.model.kind != ModelKind::quadratic && cfg.model.class_count < 2 &&
        (ds.kind == DatasetKind::synthetic_quadratic || ds.kind == DatasetKind::synthetic_blobs)) {
        problems.add("model.classes must be >= 2 for classification kinds");
    }
}

}  // namespace

CodenameProfile parse_codename(const std::string& digits) {
    if (digits.empty()) throw ConfigError("empty codename");
    CodenameProfile prof;
    for (char c : digits) {
        if (c < '1' || c > '7') {
            throw ConfigError(std::string("codename digit '") + c + "' outside 1-7");
        }
        const int d = c - '0';
        if (d == 1) {
            prof.capacities.push_back(1.0);
            prof.group_offsets.push_back(0);
        } else if (d <= 4) {
            prof.capacities.push_back(0.75);
            prof.group_offsets.push_back(static_cast<std::size_t>(d - 2));
        } else {
            prof.capacities.push_back(0.5);
            prof.group_offsets.push_back(static_cast<std::size_t>(d - 5));
        }
    }
    return prof;
}

ExperimentConfig parse_config_json(const nlohmann::json& j, const std::string& source) {
    Problems problems;
    ExperimentConfig cfg;
    check_keys(j, source, {"name", "model", "dataset", "clients", "schedule", "seeds", "output"},
               problems);
    if (j.is_object()) {
        fetch(j, source, "name", cfg.name, problems);
        if (auto it = j.find("model"); it != j.end()) parse_model(*it, cfg, problems);
        else problems.add("missing required section 'model'");
        if (auto it = j.find("dataset"); it != j.end()) parse_dataset(*it, cfg, problems);
        else problems.add("missing required section 'dataset'");
        if (auto it = j.find("clients"); it != j.end()) parse_clients(*it, cfg, problems);
        else problems.add("missing required section 'clients'");
        if (auto it = j.find("schedule"); it != j.end()) parse_schedule(*it, cfg, problems);
        if (auto it = j.find("seeds"); it != j.end()) parse_seeds(*it, cfg, problems);
        if (auto it = j.find("output"); it != j.end()) parse_output(*it, cfg, problems);
        if (problems.empty()) cross_validate(cfg, problems);
    }
    if (!problems.empty()) throw ConfigError(problems.list);
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    return parse_config_json(j, path);
}

nlohmann::ordered_json resolved_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["name"] = cfg.name;
    auto& m = j["model"];
    m["kind"] = cfg.model.kind == ModelKind::quadratic ? "quadratic"
                : cfg.model.kind == ModelKind::logistic ? "logistic" : "mlp";
    m["input_dim"] = cfg.model.input_dim;
    if (cfg.model.kind == ModelKind::mlp) m["hidden_dim"] = cfg.model.hidden_dim;
    if (cfg.model.kind != ModelKind::quadratic) {
        m["classes"] = cfg.model.class_count;
        m["activation"] = cfg.model.activation == Activation::tanh ? "tanh" : "relu";
    }
    m["init_seed"] = cfg.model.init_seed;

    auto& d = j["dataset"];
    switch (cfg.dataset.kind) {
        case DatasetKind::synthetic_quadratic:
            d["kind"] = "quadratic";
            d["dim"] = cfg.dataset.dim;
            d["condition"] = cfg.dataset.condition;
            d["samples"] = cfg.dataset.samples == 0 ? 8 * cfg.dataset.dim : cfg.dataset.samples;
            break;
        case DatasetKind::synthetic_blobs:
            d["kind"] = "blobs";
            d["samples"] = cfg.dataset.samples;
            d["test_samples"] = cfg.dataset.test_samples;
            d["dim"] = cfg.dataset.dim;
            d["classes"] = cfg.dataset.classes;
            d["spread"] = cfg.dataset.spread;
            break;
        case DatasetKind::idx_images:
            d["kind"] = "idx";
            d["images"] = cfg.dataset.images;
            d["labels"] = cfg.dataset.labels;
            if (!cfg.dataset.test_images.empty()) {
                d["test_images"] = cfg.dataset.test_images;
                d["test_labels"] = cfg.dataset.test_labels;
            }
            break;
        case DatasetKind::csv_table:
            d["kind"] = "csv";
            d["path"] = cfg.dataset.path;
            if (!cfg.dataset.test_path.empty()) d["test_path"] = cfg.dataset.test_path;
            break;
    }
    if (cfg.dataset.seed_set) d["seed"] = cfg.dataset.seed;
    else d["seed"] = "derived-from-run-seed";
    auto& p = d["partition"];
    p["kind"] = cfg.dataset.partition.kind == PartitionKind::iid ? "iid" : "label-skew";
    if (cfg.dataset.partition.kind == PartitionKind::label_skew) {
        p["max_labels"] = cfg.dataset.partition.max_labels;
    }
    if (cfg.dataset.partition.seed_set) p["seed"] = cfg.dataset.partition.seed;
    else p["seed"] = "derived-from-run-seed";

    auto& c = j["clients"];
    c["count"] = cfg.clients.count;
    if (!cfg.clients.codename.empty()) c["codename"] = cfg.clients.codename;
    c["capacity"] = cfg.clients.capacities;
    std::vector<std::string> kind_names;
    for (auto k : cfg.clients.kinds) kind_names.emplace_back(mask_kind_name(k));
    c["strategy"] = kind_names;
    if (cfg.clients.group_offsets_set) c["group_offsets"] = cfg.clients.group_offsets;
    else c["group_offsets"] = "auto (round-robin per capacity group)";
    c["keep_output"] = cfg.clients.keep_output;

    auto& s = j["schedule"];
    s["rounds"] = cfg.schedule.rounds;
    s["local_epochs"] = cfg.schedule.local_epochs;
    s["batch_size"] = cfg.batch_size;
    if (cfg.schedule.lr_policy == LrPolicy::fixed) s["gamma"] = cfg.schedule.lr_value;
    else s["gamma"] = lr_policy_name(cfg.schedule.lr_policy);
    s["participation"] = cfg.schedule.participation;
    s["momentum"] = cfg.schedule.momentum;
    s["sampling"] = cfg.schedule.with_replacement ? "with-replacement" : "epoch";
    s["threads"] = cfg.schedule.threads;

    j["seeds"]["master"] = cfg.master_seed;
    j["seeds"]["repeats"] = cfg.repeats;
    j["output"]["dir"] = cfg.output_dir;
    return j;
}

}  // namespace hetfl
