#pragma once

#include <filesystem>
#include <vector>

#include "hmimvc/matrix.hpp"

namespace hmimvc {

// Matrix files: ".csv" is header-free comma-separated decimals; any other
// extension is the binary format (magic "MVC1", u32 rows, u32 cols, then
// row-major little-endian 64-bit reals).
Matrix load_matrix(const std::filesystem::path& path);
void save_matrix(const Matrix& m, const std::filesystem::path& path);

std::vector<int> load_labels(const std::filesystem::path& path);
void save_labels(const std::vector<int>& labels, const std::filesystem::path& path);

/// Bi- or multi-view dataset: per-view feature matrices over the same N
/// instances plus ground-truth class labels.
struct MultiViewDataset {
    std::vector<Matrix> views;
    std::vector<int> labels;
    int n_classes = 0;

    index_t n() const { return labels.size(); }
    index_t n_views() const { return views.size(); }
    std::vector<index_t> view_dims() const {
        std::vector<index_t> d;
        for (const auto& v : views) d.push_back(v.cols());
        return d;
    }
};

/// Loads a dataset manifest: `viewK = path`, `viewK_dim = d`, `labels =
/// path`, optional `classes = k`. Relative paths resolve against the
/// manifest's directory. Shapes and label ranges are validated.
MultiViewDataset load_dataset(const std::filesystem::path& manifest_path);

void save_manifest(const std::filesystem::path& manifest_path,
                   const std::vector<std::string>& view_files,
                   const std::vector<index_t>& view_dims, const std::string& labels_file,
                   int n_classes);

/// Per-feature min-max scaling parameters, kept so the identical transform
/// can be replayed.
struct Normalization {
    std::vector<Vector> mins;    // per view
    std::vector<Vector> ranges;  // max − min; 0 marks a constant feature
};

/// Min-max scales every feature to [0,1] in place; constant features map
/// to 0. Returns the scaling parameters.
Normalization normalize(MultiViewDataset& ds);
void apply_normalization(MultiViewDataset& ds, const Normalization& norm);

}  // namespace hmimvc
