#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "pgil/pipeline.hpp"

using namespace pgil;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pgil-pipe-" + std::to_string(Rng(::getpid(), 7).next_u64() % 1000000));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// benchmark scaled down for fast tests
BenchmarkSpec mini_spec() {
    BenchmarkSpec spec;
    spec.patches = 70;
    spec.patch_size = 64;
    spec.test_per_class = 4;
    spec.train_k = {5};
    return spec;
}

RunConfig mini_config(std::uint64_t seed) {
    RunConfig c;
    c.seed = seed;
    c.train_split = "train-5";
    c.crops_per_patch = 10;
    c.n_v = 30;
    c.n_topics = 12;
    c.lda_iters = 60;
    c.infer_burnin = 15;
    c.infer_samples = 15;
    c.pgn_epochs = 2;
    c.pgn_batch = 16;
    c.pin_epochs = 3;
    c.pin_batch = 8;
    c.probe_epochs = 15;
    return c;
}

}  // namespace

TEST_CASE("benchmark generation: structure, splits, determinism") {
    TempDir tmp;
    ImgPhyDataset ds = generate_benchmark(tmp.path / "ds", 11, mini_spec());
    REQUIRE(ds.manifest().records.size() == 70);
    REQUIRE(ds.manifest().class_names.size() == 7);
    REQUIRE(ds.splits().at("test").size() == 28);
    REQUIRE(ds.splits().at("train-5").size() == 35);

    // per-class test counts are exact and train-5 has 5 per class
    std::map<std::string, int> label_of;
    for (const PatchRecord& r : ds.manifest().records) label_of[r.id] = r.label;
    std::vector<int> test_counts(7, 0), train_counts(7, 0);
    for (const std::string& id : ds.splits().at("test")) ++test_counts[label_of[id]];
    for (const std::string& id : ds.splits().at("train-5")) ++train_counts[label_of[id]];
    for (int c = 0; c < 7; ++c) {
        REQUIRE(test_counts[c] == 4);
        REQUIRE(train_counts[c] == 5);
    }

    // determinism: regenerate and compare one patch byte-for-byte
    ImgPhyDataset ds2 = generate_benchmark(tmp.path / "ds2", 11, mini_spec());
    REQUIRE(ds.read_img_raw("p0000") == ds2.read_img_raw("p0000"));
    ImgPhyDataset ds3 = generate_benchmark(tmp.path / "ds3", 12, mini_spec());
    REQUIRE(ds.read_img_raw("p0000") != ds3.read_img_raw("p0000"));
}

TEST_CASE("run_xm on the polarimetric benchmark produces nine-zone maps") {
    TempDir tmp;
    ImgPhyDataset ds = generate_benchmark(tmp.path / "ds", 3, mini_spec());
    RunConfig config = mini_config(3);
    run_xm(ds, config);

    REQUIRE(ds.manifest().n_s == 9);
    REQUIRE(ds.manifest().phy_provenance == "h-alpha-wishart");
    ds.validate();

    ScatteringLabelMap map = ds.read_phy("p0000");
    REQUIRE(map.height == 64);
    for (std::uint8_t l : map.labels) REQUIRE(l < 9);

    // deterministic: rerunning writes identical rasters
    std::vector<std::uint8_t> before = map.labels;
    run_xm(ds, config);
    REQUIRE(ds.read_phy("p0000").labels == before);
}

TEST_CASE("run_xm on single-channel data produces the TFA map at grid resolution") {
    TempDir tmp;
    DatasetManifest m;
    m.img_height = 64;
    m.img_width = 64;
    m.img_channels = 1;
    m.img_complex = true;
    m.phy_height = 0;
    m.phy_width = 0;
    m.n_s = 0;
    m.class_names = {"x", "y"};
    for (int i = 0; i < 8; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "s%02d", i);
        m.records.push_back({buf, i % 2, i < 6 ? "train" : "test"});
    }
    ImgPhyDataset ds = ImgPhyDataset::create(tmp.path / "slc", m);

    FilterBank bank = build_filter_bank(3, 3, 1.0 / 3.0);
    for (int i = 0; i < 8; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "s%02d", i);
        SceneLayout layout;
        layout.height = 64;
        layout.width = 64;
        ClassSpec cls;
        cls.background_power = 0.5 + 0.2 * (i % 2);
        PointTarget t;
        t.row = 32;
        t.col = 32;
        t.amplitude = 6.0;
        t.sig_rows = 3;
        t.sig_cols = 3;
        t.gains.assign(9, cd(0.0));
        t.gains[i % 2 ? 0 : 8] = cd(1.0);
        cls.targets = {t};
        layout.classes = {cls};
        layout.regions = {{0, 0, 64, 64, 0}};
        ds.write_img_complex(buf, generate_slc_scene(layout, bank, 40 + i));
    }

    RunConfig config = mini_config(5);
    config.tfa_stride = 8;
    config.tfa_segment = 16;
    config.n_s_tfa = 6;
    run_xm(ds, config);

    REQUIRE(ds.manifest().phy_provenance == "tfa");
    REQUIRE(ds.manifest().n_s == 6);
    REQUIRE(ds.manifest().phy_height == 8);
    REQUIRE(ds.manifest().phy_width == 8);
    ScatteringLabelMap map = ds.read_phy("s00");
    for (std::uint8_t l : map.labels) REQUIRE(l < 6);
}

TEST_CASE("run_encode: BoT contracts, caching, and persistence") {
    TempDir tmp;
    ImgPhyDataset ds = generate_benchmark(tmp.path / "ds", 7, mini_spec());
    RunConfig config = mini_config(7);
    run_xm(ds, config);

    EncodeResult enc = run_encode(ds, config);
    REQUIRE(enc.bots.size() == 70);
    for (const auto& [id, bot] : enc.bots) {
        REQUIRE(bot.size() == 12);
        double sum = 0;
        for (double v : bot) {
            REQUIRE(v >= 0.0);
            sum += v;
        }
        REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-6));
    }
    REQUIRE(enc.mean_corpus_sparsity >= 0.0);
    REQUIRE(enc.mean_corpus_sparsity < 1.0);

    // cached rerun: identical BoTs through the persisted vocabulary and model
    EncodeResult enc2 = run_encode(ds, config, true);
    REQUIRE(enc2.from_cache);
    for (const auto& [id, bot] : enc.bots) REQUIRE(enc2.bots.at(id) == bot);

    // the store on disk round-trips
    auto loaded = load_bots(ds);
    REQUIRE(loaded.size() == 70);
    for (const auto& [id, bot] : enc.bots)
        for (std::size_t k = 0; k < bot.size(); ++k)
            REQUIRE_THAT(loaded.at(id)[k], Catch::Matchers::WithinAbs(bot[k], 1e-15));
}

TEST_CASE("run_experiment: baseline mode, reproducibility of metrics") {
    TempDir tmp;
    ImgPhyDataset ds = generate_benchmark(tmp.path / "ds", 13, mini_spec());
    RunConfig config = mini_config(13);
    config.mode = "baseline-cnn";
    run_xm(ds, config);
    run_encode(ds, config);

    RunReport a = run_experiment(ds, config);
    REQUIRE(a.metrics.contains("test"));
    REQUIRE(a.metrics["test"]["overall_accuracy"].get<double>() >= 0.0);
    REQUIRE(a.metrics.contains("silhouette_baseline"));
    REQUIRE(a.artifact_hashes.count("pin_checkpoint") == 1);

    RunReport b = run_experiment(ds, config);
    REQUIRE(a.metrics == b.metrics);
    REQUIRE(a.artifact_hashes.at("pin_checkpoint") == b.artifact_hashes.at("pin_checkpoint"));
}

TEST_CASE("run_experiment: guided modes produce their artifacts and metrics") {
    TempDir tmp;
    ImgPhyDataset ds = generate_benchmark(tmp.path / "ds", 17, mini_spec());
    RunConfig config = mini_config(17);
    run_xm(ds, config);
    run_encode(ds, config);

    SECTION("pgn-probe") {
        config.mode = "pgn-probe";
        RunReport r = run_experiment(ds, config);
        REQUIRE(r.metrics.contains("probe"));
        REQUIRE(r.metrics.contains("silhouette_pgn"));
        REQUIRE(r.artifact_hashes.count("pgn_checkpoint") == 1);
    }
    SECTION("pgil-full") {
        config.mode = "pgil-full";
        RunReport r = run_experiment(ds, config);
        REQUIRE(r.metrics.contains("test"));
        REQUIRE(r.artifact_hashes.count("pgn_checkpoint") == 1);
        REQUIRE(r.artifact_hashes.count("pin_checkpoint") == 1);
    }
    SECTION("direct-bot-injection") {
        config.mode = "direct-bot-injection";
        RunReport r = run_experiment(ds, config);
        REQUIRE(r.metrics.contains("test"));
        REQUIRE(r.artifact_hashes.count("pgn_checkpoint") == 0);
    }
    SECTION("raw-label-guidance and pgn-finetune-only") {
        config.mode = "raw-label-guidance";
        RunReport r1 = run_experiment(ds, config);
        REQUIRE(r1.metrics.contains("test"));
        config.mode = "pgn-finetune-only";
        RunReport r2 = run_experiment(ds, config);
        REQUIRE(r2.metrics.contains("test"));
    }
    SECTION("no-sal reuses a trained guided network checkpoint") {
        config.mode = "pgil-full";
        RunReport full = run_experiment(ds, config);
        RunConfig reuse = config;
        reuse.mode = "no-sal";
        reuse.pgn_checkpoint = full.artifact_paths.at("pgn_checkpoint");
        RunReport r = run_experiment(ds, reuse);
        REQUIRE(r.metrics.contains("test"));
        REQUIRE(r.artifact_hashes.count("pgn_checkpoint_in") == 1);
        REQUIRE(r.artifact_hashes.at("pgn_checkpoint_in") ==
                full.artifact_hashes.at("pgn_checkpoint"));
    }
}

TEST_CASE("checkpoints round-trip bit exactly") {
    TempDir tmp;
    auto images = std::vector<Raster>();
    Rng rng(3);
    for (int i = 0; i < 8; ++i) {
        Raster img(64, 64);
        for (double& v : img.data) v = rng.gaussian();
        images.push_back(std::move(img));
    }
    std::vector<BoTVector> bots;
    for (int i = 0; i < 8; ++i) {
        BoTVector b(6, 0.0);
        b[i % 6] = 1.0;
        bots.push_back(b);
    }
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch = 4;
    cfg.seed = 9;
    PgnModel pgn = train_pgn(images, bots, NetProfile::desk(), cfg);
    save_pgn(pgn, tmp.path / "pgn.bin");
    PgnModel loaded = load_pgn(tmp.path / "pgn.bin");

    auto pa = pgn.params(), pb = loaded.params();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        REQUIRE(pa[i].name == pb[i].name);
        REQUIRE(pa[i].node->value.data == pb[i].node->value.data);
    }
    auto ba = pgn.buffers(), bb = loaded.buffers();
    for (std::size_t i = 0; i < ba.size(); ++i) REQUIRE(ba[i].tensor->data == bb[i].tensor->data);
    REQUIRE(loaded.input_mean == pgn.input_mean);

    // saving the loaded model reproduces the file bit for bit
    save_pgn(loaded, tmp.path / "pgn2.bin");
    REQUIRE(content_hash_file(tmp.path / "pgn.bin") == content_hash_file(tmp.path / "pgn2.bin"));
}

TEST_CASE("unsupervised corpus never includes test patches unless asked") {
    TempDir tmp;
    ImgPhyDataset ds = generate_benchmark(tmp.path / "ds", 23, mini_spec());
    RunConfig config = mini_config(23);

    std::set<std::string> test_ids(ds.splits().at("test").begin(), ds.splits().at("test").end());
    for (const std::string& id : corpus_ids(ds, config)) REQUIRE(test_ids.count(id) == 0);

    config.paper_protocol = true;
    REQUIRE(corpus_ids(ds, config).size() == ds.manifest().records.size());
}

TEST_CASE("RunConfig JSON round trip and schema rejection") {
    RunConfig c;
    c.mode = "no-sal";
    c.seed = 42;
    c.sites = {3};
    json j = c.to_json();
    RunConfig back = RunConfig::from_json(j);
    REQUIRE(back.mode == "no-sal");
    REQUIRE(back.seed == 42);
    REQUIRE(back.sites == std::vector<int>{3});

    json bad = j;
    bad["no_such_key"] = 1;
    REQUIRE_THROWS_WITH(RunConfig::from_json(bad),
                        Catch::Matchers::ContainsSubstring("no_such_key"));

    json bad_mode = j;
    bad_mode["mode"] = "warp-drive";
    REQUIRE_THROWS_AS(RunConfig::from_json(bad_mode), std::invalid_argument);
}
