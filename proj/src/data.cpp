#include "hetfl/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hetfl/rng.hpp"

namespace hetfl {

namespace {

// Modified Gram-Schmidt with one re-orthogonalization pass. Columns of the
// rows x cols input (row-major) are replaced by an orthonormal set.
void orthonormalize_columns(std::vector<double>& m, std::size_t rows, std::size_t cols) {
    auto col_dot = [&](std::size_t a, std::size_t b) {
        double s = 0.0;
        for (std::size_t r = 0; r < rows; ++r) s += m[r * cols + a] * m[r * cols + b];
        return s;
    };
    for (std::size_t c = 0; c < cols; ++c) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t prev = 0; prev < c; ++prev) {
                const double proj = col_dot(c, prev);
                for (std::size_t r = 0; r < rows; ++r) m[r * cols + c] -= proj * m[r * cols + prev];
            }
        }
        const double norm = std::sqrt(col_dot(c, c));
        if (!(norm > 1e-12)) {
            throw NumericError("degenerate column during orthonormalization");
        }
        for (std::size_t r = 0; r < rows; ++r) m[r * cols + c] /= norm;
    }
}

std::uint32_t read_be_u32(std::istream& in, const std::string& path) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw IoError("truncated file: " + path);
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

bool cell_is_numeric(const std::string& cell) {
    char* end = nullptr;
    std::strtod(cell.c_str(), &end);
    return end != cell.c_str() && *end == '\0';
}

}  // namespace

DatasetHandle make_quadratic(std::size_t dim, double condition, std::uint64_t seed,
                             std::size_t samples) {
    if (dim < 1) throw ConfigError("quadratic dataset needs dim >= 1");
    if (condition < 1.0) throw ConfigError("quadratic condition number must be >= 1");
    if (samples == 0) samples = 8 * dim;
    if (samples < dim) throw ConfigError("quadratic dataset needs samples >= dim");

    Rng rng(derive_seed(seed, {seed_tag::dataset}));
    const double log_cond = std::log(condition);
    std::vector<double> eig(dim);
    for (auto& l : eig) l = std::exp(rng.next_double() * log_cond);

    // Random orthogonal basis R (dim x dim) and orthonormal columns C
    // (samples x dim); the design matrix X = C diag(sqrt(samples*eig)) R^T
    // gives X^T X / samples = R diag(eig) R^T =: A exactly.
    std::vector<double> basis(dim * dim);
    for (auto& v : basis) v = rng.next_gaussian();
    orthonormalize_columns(basis, dim, dim);
    std::vector<double> cols(samples * dim);
    for (auto& v : cols) v = rng.next_gaussian();
    orthonormalize_columns(cols, samples, dim);

    DatasetHandle ds;
    ds.kind = DatasetKind::synthetic_quadratic;
    ds.quad_matrix.assign(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                s += basis[i * dim + k] * eig[k] * basis[j * dim + k];
            }
            ds.quad_matrix[i * dim + j] = s;
        }
    }
    ds.quad_optimum.resize(dim);
    for (auto& v : ds.quad_optimum) v = rng.next_gaussian();

    ds.samples.rows = samples;
    ds.samples.cols = dim;
    ds.samples.inputs.assign(samples * dim, 0.0);
    std::vector<double> scale(dim);
    for (std::size_t k = 0; k < dim; ++k) scale[k] = std::sqrt(static_cast<double>(samples) * eig[k]);
    for (std::size_t r = 0; r < samples; ++r) {
        double* x = ds.samples.inputs.data() + r * dim;
        for (std::size_t j = 0; j < dim; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                s += cols[r * dim + k] * scale[k] * basis[j * dim + k];
            }
            x[j] = s;
        }
    }
    ds.samples.targets.resize(samples);
    for (std::size_t r = 0; r < samples; ++r) {
        const double* x = ds.samples.row(r);
        double s = 0.0;
        for (std::size_t j = 0; j < dim; ++j) s += x[j] * ds.quad_optimum[j];
        ds.samples.targets[r] = s;
    }

    // Build-time consistency check: the empirical second moment must
    // reproduce A (this is what makes the SPD payload trustworthy).
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < samples; ++r) {
                s += ds.samples.inputs[r * dim + i] * ds.samples.inputs[r * dim + j];
            }
            s /= static_cast<double>(samples);
            if (std::abs(s - ds.quad_matrix[i * dim + j]) > 1e-6 * std::max(1.0, condition)) {
                throw NumericError("quadratic dataset construction drifted from its curvature matrix");
            }
        }
    }
    return ds;
}

DatasetHandle make_blobs(std::size_t samples, std::size_t dim, std::size_t classes, double spread,
                         std::uint64_t seed, std::uint64_t variant) {
    if (samples < classes) throw ConfigError("blobs dataset needs samples >= classes");
    if (dim < 1 || classes < 2) throw ConfigError("blobs dataset needs dim >= 1 and classes >= 2");
    if (spread < 0.0) throw ConfigError("blobs spread must be >= 0");

    Rng center_rng(derive_seed(seed, {seed_tag::dataset, 0xB0B5u}));
    std::vector<double> centers(classes * dim);
    for (auto& v : centers) v = 2.0 * center_rng.next_gaussian();

    Rng point_rng(derive_seed(seed, {seed_tag::dataset, 0xB0B5u, 1 + variant}));
    DatasetHandle ds;
    ds.kind = DatasetKind::synthetic_blobs;
    ds.class_count = classes;
    ds.samples.rows = samples;
    ds.samples.cols = dim;
    ds.samples.inputs.resize(samples * dim);
    ds.samples.labels.resize(samples);
    for (std::size_t r = 0; r < samples; ++r) {
        const std::size_t label = r % classes;
        ds.samples.labels[r] = static_cast<int>(label);
        double* x = ds.samples.inputs.data() + r * dim;
        const double* c = centers.data() + label * dim;
        for (std::size_t j = 0; j < dim; ++j) x[j] = c[j] + spread * point_rng.next_gaussian();
    }
    return ds;
}

DatasetHandle load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw IoError("cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw IoError("cannot open " + labels_path);

    const std::uint32_t img_magic = read_be_u32(img, images_path);
    if (img_magic != 0x00000803u) {
        std::ostringstream os;
        os << "bad IDX image magic in " << images_path << " (got 0x" << std::hex << img_magic << ")";
        throw FormatError(os.str());
    }
    const std::uint32_t count = read_be_u32(img, images_path);
    const std::uint32_t rows = read_be_u32(img, images_path);
    const std::uint32_t cols = read_be_u32(img, images_path);

    const std::uint32_t lab_magic = read_be_u32(lab, labels_path);
    if (lab_magic != 0x00000801u) {
        std::ostringstream os;
        os << "bad IDX label magic in " << labels_path << " (got 0x" << std::hex << lab_magic << ")";
        throw FormatError(os.str());
    }
    const std::uint32_t lab_count = read_be_u32(lab, labels_path);
    if (lab_count != count) {
        throw ConsistencyError("IDX sample counts differ: " + std::to_string(count) + " images vs " +
                               std::to_string(lab_count) + " labels");
    }

    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    DatasetHandle ds;
    ds.kind = DatasetKind::idx_images;
    ds.samples.rows = count;
    ds.samples.cols = pixels;
    ds.samples.inputs.resize(static_cast<std::size_t>(count) * pixels);
    ds.samples.labels.resize(count);

    std::vector<unsigned char> buf(pixels);
    int max_label = 0;
    for (std::uint32_t r = 0; r < count; ++r) {
        img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels));
        if (!img) throw IoError("truncated file: " + images_path);
        double* x = ds.samples.inputs.data() + static_cast<std::size_t>(r) * pixels;
        for (std::size_t j = 0; j < pixels; ++j) x[j] = buf[j] / 255.0;
        char lb = 0;
        lab.read(&lb, 1);
        if (!lab) throw IoError("truncated file: " + labels_path);
        const int label = static_cast<unsigned char>(lb);
        ds.samples.labels[r] = label;
        max_label = std::max(max_label, label);
    }
    ds.class_count = static_cast<std::size_t>(max_label) + 1;
    return ds;
}

DatasetHandle load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    DatasetHandle ds;
    ds.kind = DatasetKind::csv_table;
    std::string line;
    std::size_t width = 0;
    std::size_t lineno = 0;
    int max_label = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.empty()) continue;
        if (first_data_line) {
            first_data_line = false;
            if (!cell_is_numeric(cells[0])) continue;  // header row
        }
        if (width == 0) {
            if (cells.size() < 2) {
                throw FormatError(path + ":" + std::to_string(lineno) + ": need label plus features");
            }
            width = cells.size() - 1;
        } else if (cells.size() - 1 != width) {
            throw ConsistencyError(path + ":" + std::to_string(lineno) + ": expected " +
                                   std::to_string(width + 1) + " cells, got " +
                                   std::to_string(cells.size()));
        }
        for (const auto& c : cells) {
            if (!cell_is_numeric(c)) {
                throw FormatError(path + ":" + std::to_string(lineno) + ": non-numeric cell '" + c + "'");
            }
        }
        const int label = static_cast<int>(std::strtol(cells[0].c_str(), nullptr, 10));
        if (label < 0) throw FormatError(path + ":" + std::to_string(lineno) + ": negative label");
        max_label = std::max(max_label, label);
        ds.samples.labels.push_back(label);
        for (std::size_t j = 1; j < cells.size(); ++j) {
            ds.samples.inputs.push_back(std::strtod(cells[j].c_str(), nullptr));
        }
    }
    if (ds.samples.labels.empty()) throw IoError(path + ": no samples");
    ds.samples.rows = ds.samples.labels.size();
    ds.samples.cols = width;
    ds.class_count = static_cast<std::size_t>(max_label) + 1;
    return ds;
}

Partition partition_iid(const DatasetHandle& ds, std::size_t clients, std::uint64_t seed) {
    if (clients < 1) throw ConfigError("partition needs clients >= 1");
    const std::size_t n = ds.sample_count();
    if (clients > n) {
        throw ConfigError("cannot split " + std::to_string(n) + " samples across " +
                          std::to_string(clients) + " clients");
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(derive_seed(seed, {seed_tag::partition}));
    rng.shuffle(perm);

    Partition p;
    p.shards.resize(clients);
    const std::size_t base = n / clients;
    const std::size_t extra = n % clients;
    std::size_t pos = 0;
    for (std::size_t c = 0; c < clients; ++c) {
        const std::size_t take = base + (c < extra ? 1 : 0);
        p.shards[c].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                           perm.begin() + static_cast<std::ptrdiff_t>(pos + take));
        pos += take;
    }
    return p;
}

Partition partition_label_skew(const DatasetHandle& ds, std::size_t clients, std::size_t max_labels,
                               std::uint64_t seed) {
    if (clients < 1) throw ConfigError("partition needs clients >= 1");
    if (ds.class_count == 0 || !ds.samples.classification()) {
        throw ConfigError("label-skew partition needs a classification dataset");
    }
    const std::size_t k = ds.class_count;
    if (max_labels < 1 || max_labels > k) {
        throw ConfigError("max_labels must be in [1, class_count]");
    }
    if (clients * max_labels < k) {
        throw ConfigError("infeasible coverage: " + std::to_string(clients) + " clients x " +
                          std::to_string(max_labels) + " labels cannot cover " + std::to_string(k) +
                          " classes");
    }

    // Per-class index lists, shuffled.
    std::vector<std::vector<std::size_t>> by_class(k);
    for (std::size_t i = 0; i < ds.sample_count(); ++i) {
        const auto label = static_cast<std::size_t>(ds.samples.labels[i]);
        if (label >= k) throw ConsistencyError("label outside class count");
        by_class[label].push_back(i);
    }
    Rng rng(derive_seed(seed, {seed_tag::partition, 0x5EEDu}));
    for (auto& v : by_class) rng.shuffle(v);

    // Allocate clients*max_labels chunks to classes proportionally to class
    // size, with every class getting at least one chunk.
    const std::size_t n_chunks = clients * max_labels;
    const auto total = static_cast<double>(ds.sample_count());
    std::vector<std::size_t> chunk_count(k, 1);
    std::size_t assigned = k;
    std::vector<std::pair<double, std::size_t>> order;  // (quota, class)
    for (std::size_t c = 0; c < k; ++c) {
        order.emplace_back(n_chunks * static_cast<double>(by_class[c].size()) / total, c);
    }
    while (assigned < n_chunks) {
        // next chunk goes to the class furthest below its quota
        std::size_t best = 0;
        double best_gap = -1e300;
        for (std::size_t c = 0; c < k; ++c) {
            const double gap = order[c].first - static_cast<double>(chunk_count[c]);
            if (gap > best_gap) {
                best_gap = gap;
                best = c;
            }
        }
        ++chunk_count[best];
        ++assigned;
    }

    // Cut each class into its chunks (sizes differ by at most one within a
    // class, leftovers to the earliest chunks), then deal shuffled chunks,
    // max_labels per client. A client holding max_labels whole chunks can
    // see at most max_labels distinct classes.
    std::vector<std::vector<std::size_t>> chunks;
    chunks.reserve(n_chunks);
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t m = chunk_count[c];
        const std::size_t sz = by_class[c].size();
        const std::size_t base = sz / m;
        const std::size_t extra = sz % m;
        std::size_t pos = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t take = base + (j < extra ? 1 : 0);
            chunks.emplace_back(by_class[c].begin() + static_cast<std::ptrdiff_t>(pos),
                                by_class[c].begin() + static_cast<std::ptrdiff_t>(pos + take));
            pos += take;
        }
    }
    std::vector<std::size_t> deal(n_chunks);
    for (std::size_t i = 0; i < n_chunks; ++i) deal[i] = i;
    rng.shuffle(deal);

    Partition p;
    p.shards.resize(clients);
    for (std::size_t c = 0; c < clients; ++c) {
        for (std::size_t j = 0; j < max_labels; ++j) {
            const auto& chunk = chunks[deal[c * max_labels + j]];
            p.shards[c].insert(p.shards[c].end(), chunk.begin(), chunk.end());
        }
        if (p.shards[c].empty()) {
            throw ConfigError("label-skew partition produced an empty shard (too few samples)");
        }
    }
    return p;
}

}  // namespace hetfl
