#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pgil/dataset.hpp"
#include "pgil/rng.hpp"
#include "pgil/sar_synth.hpp"

namespace pgil {

// Desk-scale polarimetric benchmark: seven semantic classes, each a distinct
// coherency mixture and spatial texture, generated per patch with jittered
// pattern phases and power levels.
struct BenchmarkSpec {
    int patches = 600;
    int patch_size = 64;
    int test_per_class = 40;
    std::vector<int> train_k = {5, 15, 25};
};

namespace detail {

inline CoherencySpec scaled_spec(const CoherencySpec& base, double power, const std::string& name) {
    CoherencySpec s = base;
    s.matrix *= power;
    s.name = name;
    return s;
}

// patterns: 0 uniform, 1 horizontal stripes, 2 vertical stripes,
// 3 checkerboard, 4 offset-block diagonal
struct ClassTexture {
    std::string name;
    int pattern;
    int period;
    CoherencySpec spec_a;
    CoherencySpec spec_b;  // unused for uniform
};

inline std::vector<ClassTexture> benchmark_classes() {
    CoherencySpec S = surface_spec(), D = double_bounce_spec(), V = volume_spec();
    return {
        {"calm-water", 0, 0, scaled_spec(S, 0.35, "surface-0.35"), {}},
        {"smooth-ice", 0, 0, scaled_spec(S, 1.80, "surface-1.8"), {}},
        {"ridged-ice", 1, 16, scaled_spec(S, 0.80, "surface-0.8"),
         scaled_spec(D, 2.60, "double-2.6")},
        {"brash-ice", 3, 8, scaled_spec(S, 0.90, "surface-0.9"),
         scaled_spec(V, 2.00, "volume-2.0")},
        {"forest", 0, 0, scaled_spec(V, 1.10, "volume-1.1"), {}},
        {"urban", 2, 8, scaled_spec(D, 3.20, "double-3.2"), scaled_spec(S, 0.55, "surface-0.55")},
        {"shear-ridge", 4, 8, scaled_spec(V, 2.40, "volume-2.4"),
         scaled_spec(S, 0.70, "surface-0.7")},
    };
}

// Build one patch layout for a class: two region classes (a/b) laid out by
// the texture pattern, phases jittered per patch.
inline SceneLayout benchmark_patch_layout(const ClassTexture& cls, int size, Rng& rng) {
    SceneLayout layout;
    layout.height = size;
    layout.width = size;

    double jitter_a = 0.9 + 0.2 * rng.uniform();
    double jitter_b = 0.9 + 0.2 * rng.uniform();
    CoherencySpec a = cls.spec_a;
    a.matrix *= jitter_a;
    layout.specs.push_back(a);

    ClassSpec ca;
    ca.name = cls.name + "-a";
    ca.mixture = {{0, 1.0}};
    layout.classes.push_back(ca);

    if (cls.pattern != 0) {
        CoherencySpec b = cls.spec_b;
        b.matrix *= jitter_b;
        layout.specs.push_back(b);
        ClassSpec cb;
        cb.name = cls.name + "-b";
        cb.mixture = {{1, 1.0}};
        layout.classes.push_back(cb);
    }

    const int period = cls.period;
    switch (cls.pattern) {
        case 0:
            layout.regions.push_back({0, 0, size, size, 0});
            break;
        case 1: {  // horizontal stripes
            int phase = static_cast<int>(rng.uniform_int(period));
            for (int r = 0; r < size;) {
                int band = period / 2 - ((r + phase) % period) % (period / 2);
                band = std::min(band, size - r);
                int which = (((r + phase) % period) < period / 2) ? 0 : 1;
                layout.regions.push_back({r, 0, band, size, which});
                r += band;
            }
            break;
        }
        case 2: {  // vertical stripes
            int phase = static_cast<int>(rng.uniform_int(period));
            for (int c = 0; c < size;) {
                int band = period / 2 - ((c + phase) % period) % (period / 2);
                band = std::min(band, size - c);
                int which = (((c + phase) % period) < period / 2) ? 0 : 1;
                layout.regions.push_back({0, c, size, band, which});
                c += band;
            }
            break;
        }
        case 3: {  // checkerboard
            int pr = static_cast<int>(rng.uniform_int(2));
            int pc = static_cast<int>(rng.uniform_int(2));
            for (int r = 0; r < size; r += period)
                for (int c = 0; c < size; c += period) {
                    int which = ((r / period + pr) + (c / period + pc)) % 2;
                    layout.regions.push_back({r, c, std::min(period, size - r),
                                              std::min(period, size - c), which});
                }
            break;
        }
        case 4: {  // offset-block diagonal
            int phase = static_cast<int>(rng.uniform_int(2 * period));
            for (int r = 0; r < size; r += period) {
                int row_off = ((r / period) * (period / 2) + phase) % (2 * period);
                for (int c = 0; c < size;) {
                    int band = period - ((c + row_off) % period);
                    band = std::min(band, size - c);
                    int which = (((c + row_off) % (2 * period)) < period) ? 0 : 1;
                    layout.regions.push_back({r, c, std::min(period, size - r), band, which});
                    c += band;
                }
            }
            break;
        }
        default:
            throw std::logic_error("benchmark: unknown texture pattern");
    }
    return layout;
}

}  // namespace detail

// Generates the dataset under root: scenes in the Img half, labels, nested
// train-k splits plus a fixed test split. The Phy half stays pending until an
// explainable model fills it.
inline ImgPhyDataset generate_benchmark(const std::filesystem::path& root, std::uint64_t seed,
                                        const BenchmarkSpec& spec = {}) {
    auto classes = detail::benchmark_classes();
    const int n_classes = static_cast<int>(classes.size());

    // per-class patch counts, remainder spread over the first classes
    std::vector<int> counts(n_classes, spec.patches / n_classes);
    for (int i = 0; i < spec.patches % n_classes; ++i) ++counts[i];

    for (int c = 0; c < n_classes; ++c) {
        int pool = counts[c] - spec.test_per_class;
        for (int k : spec.train_k)
            if (pool < k)
                throw std::invalid_argument("generate_benchmark: class pool smaller than train-" +
                                            std::to_string(k));
    }

    std::vector<int> patch_class;
    for (int c = 0; c < n_classes; ++c)
        for (int i = 0; i < counts[c]; ++i) patch_class.push_back(c);
    Rng assign_rng(seed, 0xA551);
    assign_rng.shuffle(patch_class);

    DatasetManifest manifest;
    manifest.img_height = spec.patch_size;
    manifest.img_width = spec.patch_size;
    manifest.img_channels = 3;
    manifest.img_complex = true;
    manifest.phy_height = spec.patch_size;
    manifest.phy_width = spec.patch_size;
    manifest.n_s = 9;
    manifest.phy_provenance = "pending";
    for (const auto& c : classes) manifest.class_names.push_back(c.name);

    // split assignment: per class, shuffle indices; first test_per_class go
    // to test, the rest to the train pool. train-k subsets are nested.
    std::vector<std::vector<int>> per_class_indices(n_classes);
    for (int i = 0; i < spec.patches; ++i) per_class_indices[patch_class[i]].push_back(i);
    Rng split_rng(seed, 0x5B11);
    std::vector<std::string> split_of(spec.patches);
    std::vector<std::vector<int>> pool_of_class(n_classes);
    for (int c = 0; c < n_classes; ++c) {
        split_rng.shuffle(per_class_indices[c]);
        for (std::size_t i = 0; i < per_class_indices[c].size(); ++i) {
            int idx = per_class_indices[c][i];
            if (i < static_cast<std::size_t>(spec.test_per_class)) {
                split_of[idx] = "test";
            } else {
                split_of[idx] = "train";
                pool_of_class[c].push_back(idx);
            }
        }
    }

    auto patch_id = [](int i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "p%04d", i);
        return std::string(buf);
    };

    for (int i = 0; i < spec.patches; ++i)
        manifest.records.push_back({patch_id(i), patch_class[i], split_of[i]});

    ImgPhyDataset ds = ImgPhyDataset::create(root, manifest);

    std::map<std::string, std::vector<std::string>> splits;
    for (int i = 0; i < spec.patches; ++i)
        if (split_of[i] == "test") splits["test"].push_back(patch_id(i));
    for (int k : spec.train_k) {
        std::vector<std::string>& ids = splits["train-" + std::to_string(k)];
        for (int c = 0; c < n_classes; ++c) {
            if (static_cast<int>(pool_of_class[c].size()) < k)
                throw std::invalid_argument("generate_benchmark: class pool smaller than train-" +
                                            std::to_string(k));
            for (int i = 0; i < k; ++i) ids.push_back(patch_id(pool_of_class[c][i]));
        }
    }
    ds.set_splits(std::move(splits));

    Rng layout_root(seed, 0x14A7);
    for (int i = 0; i < spec.patches; ++i) {
        Rng layout_rng = layout_root.substream(i);
        SceneLayout layout =
            detail::benchmark_patch_layout(classes[patch_class[i]], spec.patch_size, layout_rng);
        std::uint64_t scene_seed = Rng(seed, 0x5CE0 + i).next_u64();
        PolScene scene = generate_polsar_scene(layout, scene_seed);
        ds.write_img_scene(patch_id(i), scene);
    }
    return ds;
}

}  // namespace pgil
