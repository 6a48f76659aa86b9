#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetfl/engine.hpp"

namespace hetfl {

enum class PartitionKind { iid, label_skew };

struct PartitionConfig {
    PartitionKind kind = PartitionKind::iid;
    std::size_t max_labels = 2;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

struct DatasetConfig {
    DatasetKind kind = DatasetKind::synthetic_blobs;
    // synthetic: shared fields
    std::size_t samples = 0;       // quadratic: 0 -> 8*dim
    std::size_t test_samples = 0;  // blobs held-out split (0 = none)
    std::size_t dim = 0;
    std::size_t classes = 0;
    double spread = 0.6;
    double condition = 10.0;
    // idx
    std::string images, labels, test_images, test_labels;
    // csv
    std::string path, test_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    PartitionConfig partition;
};

struct ClientsConfig {
    std::size_t count = 0;
    std::vector<double> capacities;
    std::vector<MaskKind> kinds;
    std::vector<std::size_t> group_offsets;
    bool group_offsets_set = false;
    bool keep_output = true;
    std::string codename;  // raw digit string when given
};

/// Full declarative description of one experiment. Parsed from JSON with
/// exhaustive validation; defaults follow the standard protocol
/// (Q=100 rounds, T=5 local epochs, batch 10, full participation).
struct ExperimentConfig {
    std::string name = "experiment";
    ModelSpec model;
    DatasetConfig dataset;
    ClientsConfig clients;
    Schedule schedule;
    std::size_t batch_size = 10;
    std::uint64_t master_seed = 1;
    std::size_t repeats = 1;
    std::string output_dir = "out";
};

/// Parses and fully validates a config file. On failure throws ConfigError
/// whose `details` lists every problem found, not just the first.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_json(const nlohmann::json& j, const std::string& source);

/// The config with every default made explicit (what --dry-run prints).
nlohmann::ordered_json resolved_json(const ExperimentConfig& cfg);

/// Digit-string shorthand for capacity profiles: 1 -> beta 1; 2,3,4 ->
/// beta 3/4 at region offsets 0,1,2; 5,6,7 -> beta 1/2 at offsets 0,1,2.
struct CodenameProfile {
    std::vector<double> capacities;
    std::vector<std::size_t> group_offsets;
};
CodenameProfile parse_codename(const std::string& digits);

}  // namespace hetfl
