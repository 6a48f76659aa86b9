#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetfl/models.hpp"

namespace hetfl {

enum class DatasetKind { synthetic_quadratic, synthetic_blobs, idx_images, csv_table };

/// A loaded or generated dataset. Classification kinds carry class_count;
/// the quadratic kind additionally carries the exact curvature matrix A
/// (row-major dim x dim) and the optimum theta_star, with the samples
/// constructed so the full-dataset least-squares loss equals
/// 0.5 (theta - theta*)^T A (theta - theta*) exactly.
struct DatasetHandle {
    DatasetKind kind = DatasetKind::synthetic_blobs;
    Batch samples;
    std::size_t class_count = 0;
    std::vector<double> quad_matrix;
    std::vector<double> quad_optimum;

    std::size_t dim() const { return samples.cols; }
    std::size_t sample_count() const { return samples.rows; }
};

/// Disjoint client shards indexing into a dataset. Client id = position.
struct Partition {
    std::vector<std::vector<std::size_t>> shards;
};

/// Strongly convex quadratic testbed. Eigenvalues are drawn log-uniformly
/// from [1, condition] over a random orthogonal basis; theta* is standard
/// normal. `samples` defaults to 8*dim (must be >= dim). Deterministic in
/// the seed.
DatasetHandle make_quadratic(std::size_t dim, double condition, std::uint64_t seed,
                             std::size_t samples = 0);

/// Gaussian-blob classification data: class centers ~ N(0, 2^2 I), points
/// center + spread * N(0, I), labels assigned round-robin. `variant`
/// selects an independent sample stream over the same centers (0 = train,
/// 1 = test).
DatasetHandle make_blobs(std::size_t samples, std::size_t dim, std::size_t classes, double spread,
                         std::uint64_t seed, std::uint64_t variant = 0);

/// Loads the big-endian IDX image/label container pair (magic 0x00000803 /
/// 0x00000801). Pixels are scaled to [0, 1] by dividing by 255.
DatasetHandle load_idx(const std::string& images_path, const std::string& labels_path);

/// Loads "label,v1,v2,..." rows; a header row is skipped when the first
/// cell of the first line is non-numeric. Values are taken as-is.
DatasetHandle load_csv(const std::string& path);

/// Random balanced split: shard sizes differ by at most one, leftovers go
/// to the lowest-numbered clients.
Partition partition_iid(const DatasetHandle& ds, std::size_t clients, std::uint64_t seed);

/// Label-skew split: each client sees at most `max_labels` distinct
/// classes. Samples are grouped by class, each class is cut into chunks
/// (clients*max_labels chunks total, allocated to classes proportionally),
/// and each client receives max_labels whole chunks.
Partition partition_label_skew(const DatasetHandle& ds, std::size_t clients, std::size_t max_labels,
                               std::uint64_t seed);

}  // namespace hetfl
