#pragma once

#include <filesystem>

#include "hmimvc/dataset.hpp"

namespace hmimvc {

/// Bundled synthetic benchmark: Gaussian blobs per class in view-1 space,
/// view 2 produced by a random linear cross-view map plus view-private
/// noise. Labels are balanced.
struct SynthConfig {
    index_t n = 2000;
    int classes = 10;
    index_t dim1 = 20;
    index_t dim2 = 30;
    double center_scale = 1.0;
    double noise = 0.15;        // within-class spread in view-1 space
    double cross_noise = 0.05;  // view-2 private noise
    std::uint64_t seed = 0;
};

MultiViewDataset make_synthetic(const SynthConfig& config);

/// Writes view1.csv, view2.mvb, labels.txt, and manifest.txt under
/// out_dir. Returns the manifest path.
std::filesystem::path write_synthetic(const SynthConfig& config,
                                      const std::filesystem::path& out_dir);

}  // namespace hmimvc
