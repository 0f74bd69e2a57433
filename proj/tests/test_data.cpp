#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "hmimvc/corruption.hpp"
#include "hmimvc/dataset.hpp"
#include "hmimvc/synth.hpp"

using namespace hmimvc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("hmimvc_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

MultiViewDataset tiny_dataset() {
    MultiViewDataset ds;
    ds.views.push_back(Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}, {7, 8}}));
    ds.views.push_back(Matrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}}));
    ds.labels = {0, 0, 1, 1};
    ds.n_classes = 2;
    return ds;
}

}  // namespace

TEST_CASE("manifest load validates shapes and labels") {
    TempDir dir;
    const MultiViewDataset src = tiny_dataset();
    save_matrix(src.views[0], dir.path / "v1.csv");
    save_matrix(src.views[1], dir.path / "v2.csv");
    save_labels(src.labels, dir.path / "labels.txt");
    save_manifest(dir.path / "manifest.txt", {"v1.csv", "v2.csv"}, {2, 3}, "labels.txt", 2);

    const MultiViewDataset ds = load_dataset(dir.path / "manifest.txt");
    CHECK(ds.n() == 4);
    CHECK(ds.view_dims() == std::vector<index_t>{2, 3});
    CHECK(ds.n_classes == 2);
    CHECK(ds.views[0](2, 1) == 6.0);

    // Declared dim mismatch is rejected.
    save_manifest(dir.path / "bad.txt", {"v1.csv", "v2.csv"}, {2, 7}, "labels.txt", 2);
    CHECK_THROWS_AS(load_dataset(dir.path / "bad.txt"), ConfigError);

    // Missing file is rejected.
    save_manifest(dir.path / "gone.txt", {"nope.csv", "v2.csv"}, {2, 3}, "labels.txt", 2);
    CHECK_THROWS_AS(load_dataset(dir.path / "gone.txt"), ConfigError);
}

TEST_CASE("row-count mismatch across views is a load error") {
    TempDir dir;
    save_matrix(Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}}), dir.path / "v1.csv");
    save_matrix(Matrix::from_rows({{1}, {2}}), dir.path / "v2.csv");
    save_labels({0, 1, 0}, dir.path / "labels.txt");
    save_manifest(dir.path / "manifest.txt", {"v1.csv", "v2.csv"}, {2, 1}, "labels.txt", 2);
    CHECK_THROWS_WITH_AS(load_dataset(dir.path / "manifest.txt"), doctest::Contains("v2.csv"),
                         ConfigError);
}

TEST_CASE("labels out of range are rejected") {
    TempDir dir;
    save_matrix(Matrix::from_rows({{1}, {2}}), dir.path / "v1.csv");
    save_matrix(Matrix::from_rows({{1}, {2}}), dir.path / "v2.csv");
    save_labels({0, 5}, dir.path / "labels.txt");
    save_manifest(dir.path / "manifest.txt", {"v1.csv", "v2.csv"}, {1, 1}, "labels.txt", 2);
    CHECK_THROWS_AS(load_dataset(dir.path / "manifest.txt"), ConfigError);
}

TEST_CASE("binary matrix files round-trip exactly") {
    TempDir dir;
    Rng rng(3);
    Matrix m(17, 5);
    for (index_t i = 0; i < m.size(); ++i) m.storage()[i] = rng.normal();
    save_matrix(m, dir.path / "m.mvb");
    const Matrix back = load_matrix(dir.path / "m.mvb");
    CHECK(back == m);  // bit-exact

    // Truncation is detected.
    {
        std::ofstream out(dir.path / "trunc.mvb", std::ios::binary);
        std::ifstream in(dir.path / "m.mvb", std::ios::binary);
        std::vector<char> bytes(64);
        in.read(bytes.data(), 64);
        out.write(bytes.data(), 64);
    }
    CHECK_THROWS_AS(load_matrix(dir.path / "trunc.mvb"), ConfigError);
}

TEST_CASE("csv matrix files round-trip to full precision") {
    TempDir dir;
    const Matrix m = Matrix::from_rows({{0.1, -2.5e-17}, {3.14159265358979, 1e300}});
    save_matrix(m, dir.path / "m.csv");
    const Matrix back = load_matrix(dir.path / "m.csv");
    CHECK(back == m);
}

TEST_CASE("normalize rescales to [0,1] and is idempotent") {
    MultiViewDataset ds;
    ds.views.push_back(Matrix::from_rows({{2}, {4}, {6}}));
    ds.views.push_back(Matrix::from_rows({{5, 0}, {5, 0.5}, {5, 1}}));
    ds.labels = {0, 1, 0};
    ds.n_classes = 2;
    normalize(ds);
    CHECK(ds.views[0](0, 0) == 0.0);
    CHECK(ds.views[0](1, 0) == 0.5);
    CHECK(ds.views[0](2, 0) == 1.0);
    // constant feature maps to 0
    CHECK(ds.views[1](0, 0) == 0.0);
    CHECK(ds.views[1](2, 0) == 0.0);
    // already-normalized feature unchanged
    CHECK(ds.views[1](1, 1) == 0.5);

    const Matrix before = ds.views[1];
    normalize(ds);
    CHECK(ds.views[1] == before);
}

TEST_CASE("normalize output stays in [0,1] on random data") {
    SynthConfig cfg;
    cfg.n = 200;
    cfg.classes = 4;
    cfg.seed = 9;
    MultiViewDataset ds = make_synthetic(cfg);
    normalize(ds);
    for (const auto& view : ds.views)
        for (double v : view.storage()) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
}

TEST_CASE("corruption sizes follow the ratios exactly") {
    SynthConfig cfg;
    cfg.n = 100;
    cfg.classes = 4;
    MultiViewDataset ds = make_synthetic(cfg);
    const PartitionMasks masks = simulate_corruption(ds, 0.25, 0.25, 42);
    CHECK(masks.missing_idx.size() == 25);
    CHECK(masks.unaligned_idx.size() == 25);
    CHECK(masks.complete_idx.size() == 50);
    CHECK(masks.gamma() == doctest::Approx(0.5));
}

TEST_CASE("zero corruption reduces to complete data") {
    SynthConfig cfg;
    cfg.n = 50;
    cfg.classes = 5;
    MultiViewDataset ds = make_synthetic(cfg);
    const PartitionMasks masks = simulate_corruption(ds, 0.0, 0.0, 1);
    CHECK(masks.complete_idx.size() == 50);
    CHECK(masks.shuffle_perm.empty());
    CHECK(masks.missing_view.empty());
}

TEST_CASE("corruption partition properties on the ratio grid") {
    SynthConfig cfg;
    cfg.n = 120;
    cfg.classes = 4;
    MultiViewDataset ds = make_synthetic(cfg);
    const double grid[] = {0.0, 0.1, 0.25, 0.4};
    for (double alpha : grid)
        for (double beta : grid) {
            const PartitionMasks masks = simulate_corruption(ds, alpha, beta, 7);
            masks.validate();  // disjoint, covering, derangement
            CHECK(masks.missing_idx.size() == static_cast<index_t>(std::llround(alpha * 120)));
            CHECK(masks.unaligned_idx.size() == static_cast<index_t>(std::llround(beta * 120)));
        }
}

TEST_CASE("corruption rejects invalid ratios") {
    SynthConfig cfg;
    cfg.n = 40;
    cfg.classes = 4;
    MultiViewDataset ds = make_synthetic(cfg);
    CHECK_THROWS_AS(simulate_corruption(ds, 0.6, 0.6, 1), ConfigError);
    // beta of one instance cannot be deranged
    CHECK_THROWS_WITH_AS(simulate_corruption(ds, 0.0, 1.0 / 40.0, 1),
                         doctest::Contains("derange"), ConfigError);
}

TEST_CASE("derangements have no fixed points across seeds and sizes") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        for (index_t n = 2; n <= 50; n += 7) {
            const IndexVec perm = random_derangement(n, rng);
            std::vector<bool> hit(n, false);
            for (index_t i = 0; i < n; ++i) {
                CHECK(perm[i] != i);
                hit[perm[i]] = true;
            }
            for (bool h : hit) CHECK(h);
        }
    }
    Rng rng(0);
    CHECK_THROWS_AS(random_derangement(1, rng), ConfigError);
}

TEST_CASE("corruption replays identically for a fixed seed") {
    SynthConfig cfg;
    cfg.n = 10;
    cfg.classes = 2;
    MultiViewDataset ds = make_synthetic(cfg);
    const PartitionMasks a = simulate_corruption(ds, 0.2, 0.4, 77);
    const PartitionMasks b = simulate_corruption(ds, 0.2, 0.4, 77);
    CHECK(a.complete_idx == b.complete_idx);
    CHECK(a.unaligned_idx == b.unaligned_idx);
    CHECK(a.missing_idx == b.missing_idx);
    CHECK(a.shuffle_perm == b.shuffle_perm);
    CHECK(a.missing_view == b.missing_view);
}

TEST_CASE("masks files round-trip and are byte-identical per seed") {
    TempDir dir;
    SynthConfig cfg;
    cfg.n = 60;
    cfg.classes = 3;
    MultiViewDataset ds = make_synthetic(cfg);
    const PartitionMasks masks = simulate_corruption(ds, 0.25, 0.25, 5);
    save_masks(masks, dir.path / "a.masks");
    save_masks(masks, dir.path / "b.masks");

    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(slurp(dir.path / "a.masks") == slurp(dir.path / "b.masks"));

    const PartitionMasks back = load_masks(dir.path / "a.masks");
    CHECK(back.complete_idx == masks.complete_idx);
    CHECK(back.unaligned_idx == masks.unaligned_idx);
    CHECK(back.missing_idx == masks.missing_idx);
    CHECK(back.shuffle_perm == masks.shuffle_perm);
    CHECK(back.missing_view == masks.missing_view);
    CHECK(back.alpha == masks.alpha);
}

TEST_CASE("observed view 2 presents deranged rows on the unaligned set") {
    SynthConfig cfg;
    cfg.n = 30;
    cfg.classes = 3;
    MultiViewDataset ds = make_synthetic(cfg);
    const PartitionMasks masks = simulate_corruption(ds, 0.0, 0.4, 3);
    const Matrix obs = observed_view2(ds, masks);
    for (index_t t = 0; t < masks.unaligned_idx.size(); ++t) {
        const index_t pos = masks.unaligned_idx[t];
        const index_t src = masks.shuffle_perm[t];
        for (index_t j = 0; j < obs.cols(); ++j) CHECK(obs(pos, j) == ds.views[1](src, j));
    }
    for (index_t i : masks.complete_idx)
        for (index_t j = 0; j < obs.cols(); ++j) CHECK(obs(i, j) == ds.views[1](i, j));
}

TEST_CASE("pair sampling builds one positive and one negative per index") {
    SynthConfig cfg;
    cfg.n = 20;
    cfg.classes = 2;
    MultiViewDataset ds = make_synthetic(cfg);
    const PartitionMasks masks = simulate_corruption(ds, 0.0, 0.0, 1);

    IndexVec batch(masks.complete_idx.begin(), masks.complete_idx.begin() + 4);
    const PairBatch pairs = sample_pairs(masks, batch, 9);
    CHECK(pairs.size() == 8);
    CHECK(pairs.n_positive() == 4);
    CHECK(pairs.n_negative() == 4);
    for (index_t k = 0; k < pairs.size(); ++k) {
        if (pairs.y[k] == 1)
            CHECK(pairs.anchor_idx[k] == pairs.partner_idx[k]);
        else
            CHECK(pairs.anchor_idx[k] != pairs.partner_idx[k]);
    }

    // Batch of two: the only negative partner is the other index.
    IndexVec two(masks.complete_idx.begin(), masks.complete_idx.begin() + 2);
    const PairBatch p2 = sample_pairs(masks, two, 1);
    for (index_t k = 0; k < p2.size(); ++k)
        if (p2.y[k] == 0) CHECK(p2.partner_idx[k] == (p2.anchor_idx[k] == two[0] ? two[1] : two[0]));

    // Batch of one cannot form a negative pair.
    IndexVec one{masks.complete_idx[0]};
    CHECK_THROWS_AS(sample_pairs(masks, one, 1), ConfigError);

    // Replay is identical.
    const PairBatch r1 = sample_pairs(masks, batch, 123);
    const PairBatch r2 = sample_pairs(masks, batch, 123);
    CHECK(r1.anchor_idx == r2.anchor_idx);
    CHECK(r1.partner_idx == r2.partner_idx);
    CHECK(r1.y == r2.y);
}

TEST_CASE("pair sampling rejects indices outside the complete set") {
    SynthConfig cfg;
    cfg.n = 20;
    cfg.classes = 2;
    MultiViewDataset ds = make_synthetic(cfg);
    const PartitionMasks masks = simulate_corruption(ds, 0.0, 0.25, 1);
    IndexVec batch{masks.unaligned_idx[0], masks.complete_idx[0]};
    CHECK_THROWS_AS(sample_pairs(masks, batch, 1), ConfigError);
}
