#include "hmimvc/synth.hpp"

#include "hmimvc/rng.hpp"

namespace hmimvc {

MultiViewDataset make_synthetic(const SynthConfig& config) {
    if (config.classes < 1) throw ConfigError("synth: classes must be >= 1");
    if (config.n < static_cast<index_t>(config.classes))
        throw ConfigError("synth: need at least one sample per class");
    Rng rng(derive_seed(config.seed, seed_tag::synth));

    const index_t k = static_cast<index_t>(config.classes);
    Matrix centers(k, config.dim1);
    for (index_t c = 0; c < k; ++c)
        for (index_t j = 0; j < config.dim1; ++j)
            centers(c, j) = rng.normal(0.0, config.center_scale);

    // Cross-view map: x2 = A·x1 + b, scaled so view-2 magnitudes stay
    // comparable to view 1.
    Matrix a(config.dim2, config.dim1);
    const double a_scale = 1.0 / std::sqrt(static_cast<double>(config.dim1));
    for (index_t i = 0; i < a.size(); ++i) a.storage()[i] = rng.normal(0.0, a_scale);
    Vector b(config.dim2);
    for (double& v : b) v = rng.normal(0.0, 0.1);

    MultiViewDataset ds;
    ds.n_classes = config.classes;
    ds.views.emplace_back(config.n, config.dim1);
    ds.views.emplace_back(config.n, config.dim2);
    ds.labels.resize(config.n);
    for (index_t i = 0; i < config.n; ++i) {
        const index_t c = i % k;
        ds.labels[i] = static_cast<int>(c);
        auto x1 = ds.views[0].row(i);
        for (index_t j = 0; j < config.dim1; ++j)
            x1[j] = centers(c, j) + rng.normal(0.0, config.noise);
        auto x2 = ds.views[1].row(i);
        for (index_t j = 0; j < config.dim2; ++j) {
            double acc = b[j];
            for (index_t p = 0; p < config.dim1; ++p) acc += a(j, p) * x1[p];
            x2[j] = acc + rng.normal(0.0, config.cross_noise);
        }
    }
    return ds;
}

std::filesystem::path write_synthetic(const SynthConfig& config,
                                      const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const MultiViewDataset ds = make_synthetic(config);
    save_matrix(ds.views[0], out_dir / "view1.csv");
    save_matrix(ds.views[1], out_dir / "view2.mvb");
    save_labels(ds.labels, out_dir / "labels.txt");
    const auto manifest = out_dir / "manifest.txt";
    save_manifest(manifest, {"view1.csv", "view2.mvb"}, {config.dim1, config.dim2}, "labels.txt",
                  config.classes);
    return manifest;
}

}  // namespace hmimvc
