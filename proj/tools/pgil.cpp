// Command-line front end for the PGIL pipeline: synthetic scene generation,
// explainable-model label maps, topic encoding, network training, evaluation
// and full reproducible experiment runs over Img-Phy datasets.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgil/pipeline.hpp"
#include "pgil/scene_json.hpp"

namespace fs = std::filesystem;
using pgil::json;

namespace {

void emit(const json& report, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << report.dump(2) << std::endl;
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write report to " + out_path);
        out << report.dump(2) << "\n";
    }
}

pgil::RunConfig load_config(const std::string& config_path) {
    if (config_path.empty()) return pgil::RunConfig{};
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config " + config_path);
    json j;
    in >> j;
    return pgil::RunConfig::from_json(j);
}

// flags shared by the pipeline verbs; every flag mirrors a RunConfig field
void add_config_flags(CLI::App* cmd, pgil::RunConfig& config) {
    cmd->add_option("--mode", config.mode, "experiment mode");
    cmd->add_option("--profile", config.profile, "network profile: desk | full");
    cmd->add_option("--pgn-checkpoint", config.pgn_checkpoint,
                    "reuse this guided-network checkpoint instead of training");
    cmd->add_option("--train-split", config.train_split, "labeled split, e.g. train-5");
    cmd->add_option("--constraint", config.constraint, "guidance constraint: soft | hard");
    cmd->add_option("--n-topics", config.n_topics, "LDA topic count K");
    cmd->add_option("--n-v", config.n_v, "vocabulary size N_v");
    cmd->add_option("--lda-iters", config.lda_iters, "LDA Gibbs sweeps");
    cmd->add_option("--crops-per-patch", config.crops_per_patch, "word crops per patch");
    cmd->add_option("--mask-alpha", config.mask_alpha, "activation threshold alpha");
    cmd->add_option("--mask-pa", config.mask_pa, "activation keep probability p_a");
    cmd->add_option("--lambda", config.lambda, "guidance loss weight in the combined loss");
    cmd->add_option("--pgn-epochs", config.pgn_epochs, "guided-network epochs");
    cmd->add_option("--pgn-batch", config.pgn_batch, "guided-network batch size");
    cmd->add_option("--pgn-lr", config.pgn_lr, "guided-network learning rate");
    cmd->add_option("--pin-epochs", config.pin_epochs, "classifier epochs");
    cmd->add_option("--pin-batch", config.pin_batch, "classifier batch size");
    cmd->add_option("--pin-lr", config.pin_lr, "classifier initial learning rate");
    cmd->add_option("--sites", config.sites, "injection sites, subset of {2,3,4}");
    cmd->add_flag("--sal,!--no-sal", config.sal, "self-adaptive fine-tuning of the guided network");
    cmd->add_flag("--paper-protocol", config.paper_protocol,
                  "feed test images (never labels) to the unsupervised stages");
    cmd->add_option("--wishart-window", config.wishart_window, "multilook window");
    cmd->add_option("--amp-multilook", config.amp_multilook, "amplitude multilook window");
    cmd->add_option("--tfa-stride", config.tfa_stride, "TFA grid stride");
    cmd->add_option("--tfa-segment", config.tfa_segment, "TFA segment size");
    cmd->add_option("--n-s-tfa", config.n_s_tfa, "TFA scattering class count");
}

int cmd_synth(const std::string& out_root, std::uint64_t seed, bool benchmark,
              const std::string& layout_path, int count, int patches, int patch_size,
              int test_per_class, const std::vector<int>& train_k, const std::string& out_path) {
    json report;
    if (benchmark) {
        pgil::BenchmarkSpec spec;
        spec.patches = patches;
        spec.patch_size = patch_size;
        spec.test_per_class = test_per_class;
        spec.train_k = train_k;
        pgil::ImgPhyDataset ds = pgil::generate_benchmark(out_root, seed, spec);
        ds.validate();
        report = {{"command", "synth"},
                  {"kind", "benchmark"},
                  {"root", out_root},
                  {"seed", seed},
                  {"patches", spec.patches},
                  {"classes", ds.manifest().class_names},
                  {"manifest_hash", pgil::content_hash_file(fs::path(out_root) / "manifest.json")}};
    } else {
        std::ifstream in(layout_path);
        if (!in) throw std::runtime_error("cannot open layout " + layout_path);
        json lj;
        in >> lj;
        pgil::SceneLayout layout = pgil::scene_layout_from_json(lj);

        bool polarimetric = false;
        for (const pgil::ClassSpec& c : layout.classes)
            if (!c.mixture.empty()) polarimetric = true;

        pgil::DatasetManifest manifest;
        manifest.img_height = layout.height;
        manifest.img_width = layout.width;
        manifest.img_complex = true;
        manifest.img_channels =
            polarimetric ? (layout.specs.empty() ? 3 : layout.specs[0].dim) : 1;
        manifest.phy_height = layout.height;
        manifest.phy_width = layout.width;
        manifest.n_s = 0;
        for (const pgil::ClassSpec& c : layout.classes) manifest.class_names.push_back(c.name);

        // patch label: the class covering the most pixels
        std::vector<std::size_t> cover(layout.classes.size(), 0);
        for (const pgil::Region& r : layout.regions)
            cover[r.class_id] += static_cast<std::size_t>(r.height) * r.width;
        int label = static_cast<int>(std::max_element(cover.begin(), cover.end()) - cover.begin());

        for (int i = 0; i < count; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "p%04d", i);
            manifest.records.push_back({buf, label, "train"});
        }
        pgil::ImgPhyDataset ds = pgil::ImgPhyDataset::create(out_root, manifest);
        pgil::FilterBank bank = pgil::build_filter_bank(3, 3, 1.0 / 3.0);
        for (int i = 0; i < count; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "p%04d", i);
            std::uint64_t patch_seed = pgil::Rng(seed, 0x5CE0 + i).next_u64();
            if (polarimetric)
                ds.write_img_scene(buf, pgil::generate_polsar_scene(layout, patch_seed));
            else
                ds.write_img_complex(buf, pgil::generate_slc_scene(layout, bank, patch_seed));
        }
        report = {{"command", "synth"},
                  {"kind", polarimetric ? "polarimetric" : "single-channel"},
                  {"root", out_root},
                  {"seed", seed},
                  {"patches", count},
                  {"manifest_hash", pgil::content_hash_file(fs::path(out_root) / "manifest.json")}};
    }
    emit(report, out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"physics guided and injected learning pipeline for SAR image classification"};
    app.require_subcommand(1);

    std::string root, config_path, out_path;
    std::uint64_t seed = 0;

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic Img-Phy dataset");
    bool synth_benchmark = false;
    std::string layout_path;
    int synth_count = 1, bench_patches = 600, bench_patch_size = 64, bench_test_per_class = 40;
    synth->add_option("--out", root, "dataset root directory")->required();
    synth->add_option("--seed", seed, "generation seed")->required();
    synth->add_flag("--benchmark", synth_benchmark, "generate the builtin 7-class benchmark");
    synth->add_option("--layout", layout_path, "scene layout JSON");
    synth->add_option("--count", synth_count, "patches to generate from the layout");
    synth->add_option("--patches", bench_patches, "benchmark patch count");
    synth->add_option("--patch-size", bench_patch_size, "benchmark patch size");
    synth->add_option("--test-per-class", bench_test_per_class, "benchmark test patches per class");
    std::vector<int> bench_train_k = {5, 15, 25};
    synth->add_option("--train-k", bench_train_k, "benchmark train-k split sizes");
    synth->add_option("--out-report", out_path, "write the JSON report here instead of stdout");

    // xm
    auto* xm = app.add_subcommand("xm", "fill the Phy half with explainable-model label maps");
    pgil::RunConfig xm_config;
    xm->add_option("--root", root, "dataset root")->required();
    xm->add_option("--config", config_path, "RunConfig JSON file");
    xm->add_option("--seed", seed, "seed for the TFA clustering stage");
    xm->add_option("--out", out_path, "write the JSON report here instead of stdout");
    add_config_flags(xm, xm_config);

    // encode
    auto* encode = app.add_subcommand("encode", "train vocabulary + LDA and infer BoT vectors");
    pgil::RunConfig enc_config;
    bool enc_cached = false;
    encode->add_option("--root", root, "dataset root")->required();
    encode->add_option("--config", config_path, "RunConfig JSON file");
    encode->add_option("--seed", seed, "encoder seed");
    encode->add_flag("--cached", enc_cached, "reuse persisted vocabulary and LDA model");
    encode->add_option("--out", out_path, "write the JSON report here instead of stdout");
    add_config_flags(encode, enc_config);

    // train-pgn
    auto* tpgn = app.add_subcommand("train-pgn", "train the physics guided network");
    pgil::RunConfig tpgn_config;
    std::string ckpt_out;
    tpgn->add_option("--root", root, "dataset root")->required();
    tpgn->add_option("--seed", seed, "training seed")->required();
    tpgn->add_option("--config", config_path, "RunConfig JSON file");
    tpgn->add_option("--out-model", ckpt_out, "checkpoint path");
    tpgn->add_option("--out", out_path, "write the JSON report here instead of stdout");
    add_config_flags(tpgn, tpgn_config);

    // train-pin
    auto* tpin = app.add_subcommand("train-pin", "train the physics injected classifier");
    pgil::RunConfig tpin_config;
    std::string pgn_ckpt, pin_ckpt_out;
    tpin->add_option("--root", root, "dataset root")->required();
    tpin->add_option("--seed", seed, "training seed")->required();
    tpin->add_option("--config", config_path, "RunConfig JSON file");
    tpin->add_option("--pgn", pgn_ckpt, "guided-network checkpoint to inject from");
    tpin->add_option("--out-model", pin_ckpt_out, "checkpoint path");
    tpin->add_option("--out", out_path, "write the JSON report here instead of stdout");
    add_config_flags(tpin, tpin_config);

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "classification report of a trained classifier");
    pgil::RunConfig eval_config;
    std::string eval_pin, eval_pgn;
    eval->add_option("--root", root, "dataset root")->required();
    eval->add_option("--pin", eval_pin, "classifier checkpoint")->required();
    eval->add_option("--pgn", eval_pgn, "guided-network checkpoint for injection");
    eval->add_option("--config", config_path, "RunConfig JSON file");
    eval->add_option("--seed", seed, "seed echoed into the report");
    eval->add_option("--out", out_path, "write the JSON report here instead of stdout");
    add_config_flags(eval, eval_config);

    // run
    auto* run = app.add_subcommand("run", "full pipeline: explainable models, encoding, training, report");
    pgil::RunConfig run_config;
    bool run_fresh_encode = false;
    run->add_option("--root", root, "dataset root")->required();
    run->add_option("--seed", seed, "experiment seed")->required();
    run->add_option("--config", config_path, "RunConfig JSON file");
    run->add_flag("--fresh-encode", run_fresh_encode, "retrain vocabulary and LDA even if cached");
    run->add_option("--out", out_path, "write the JSON report here instead of stdout");
    add_config_flags(run, run_config);

    // report
    auto* rep = app.add_subcommand("report", "summarize a stored RunReport");
    std::string report_in;
    bool report_json = false;
    rep->add_option("--in", report_in, "RunReport JSON file")->required();
    rep->add_flag("--json", report_json, "echo the raw JSON instead of the summary");
    rep->add_option("--out", out_path, "write output here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            if (synth_benchmark == layout_path.empty() && !synth_benchmark)
                throw std::runtime_error("synth: pass either --benchmark or --layout");
            return cmd_synth(root, seed, synth_benchmark, layout_path, synth_count, bench_patches,
                             bench_patch_size, bench_test_per_class, bench_train_k, out_path);
        }

        auto merged = [&](pgil::RunConfig& flags_config) {
            // file config first, then flag overrides already parsed into flags_config
            if (config_path.empty()) {
                if (seed != 0 || flags_config.seed == 0) flags_config.seed = seed;
                flags_config.validate();
                return flags_config;
            }
            pgil::RunConfig file_config = load_config(config_path);
            // overlay every flag the user actually passed by re-parsing into file_config
            // (CLI11 already wrote into flags_config; copy the fields that differ from defaults)
            pgil::RunConfig defaults;
            json d = defaults.to_json(), f = flags_config.to_json(), out = file_config.to_json();
            for (auto it = f.begin(); it != f.end(); ++it)
                if (d.at(it.key()) != it.value()) out[it.key()] = it.value();
            if (seed != 0) out["seed"] = seed;
            return pgil::RunConfig::from_json(out);
        };

        if (*xm) {
            pgil::RunConfig config = merged(xm_config);
            pgil::ImgPhyDataset ds = pgil::ImgPhyDataset::open(root);
            pgil::run_xm(ds, config);
            ds.validate();
            emit({{"command", "xm"},
                  {"root", root},
                  {"n_s", ds.manifest().n_s},
                  {"provenance", ds.manifest().phy_provenance},
                  {"phy_dims", {ds.manifest().phy_height, ds.manifest().phy_width}},
                  {"manifest_hash", pgil::content_hash_file(fs::path(root) / "manifest.json")}},
                 out_path);
            return 0;
        }
        if (*encode) {
            pgil::RunConfig config = merged(enc_config);
            pgil::ImgPhyDataset ds = pgil::ImgPhyDataset::open(root);
            pgil::EncodeResult enc = pgil::run_encode(ds, config, enc_cached);
            emit({{"command", "encode"},
                  {"root", root},
                  {"n_topics", enc.lda.n_topics},
                  {"n_v", enc.vocab.size()},
                  {"from_cache", enc.from_cache},
                  {"mean_corpus_sparsity", enc.mean_corpus_sparsity},
                  {"vocab_hash", pgil::content_hash_file(fs::path(root) / "encode/vocab.bin")},
                  {"lda_hash", pgil::content_hash_file(fs::path(root) / "encode/lda.bin")},
                  {"bots_hash", pgil::content_hash_file(fs::path(root) / "encode/bots.csv")}},
                 out_path);
            return 0;
        }
        if (*tpgn) {
            pgil::RunConfig config = merged(tpgn_config);
            pgil::ImgPhyDataset ds = pgil::ImgPhyDataset::open(root);
            auto bots = pgil::load_bots(ds);
            std::vector<pgil::Raster> images;
            std::vector<pgil::BoTVector> guidance;
            for (const std::string& id : pgil::corpus_ids(ds, config)) {
                images.push_back(ds.load_amplitude(id, config.amp_multilook));
                guidance.push_back(bots.at(id));
            }
            std::vector<pgil::EpochLog> logs;
            pgil::PgnModel pgn =
                pgil::train_pgn(images, guidance, config.net_profile(), config.pgn_train_config(), &logs);
            if (ckpt_out.empty())
                ckpt_out = (fs::path(root) / "models" /
                            ("cli-pgn-seed" + std::to_string(config.seed) + ".bin"))
                               .string();
            fs::create_directories(fs::path(ckpt_out).parent_path());
            pgil::save_pgn(pgn, ckpt_out);
            json jl = json::array();
            for (const pgil::EpochLog& l : logs)
                jl.push_back({{"epoch", l.epoch}, {"loss", l.mean_loss}, {"lr", l.lr}});
            emit({{"command", "train-pgn"},
                  {"checkpoint", ckpt_out},
                  {"checkpoint_hash", pgil::content_hash_file(ckpt_out)},
                  {"epochs", jl}},
                 out_path);
            return 0;
        }
        if (*tpin) {
            pgil::RunConfig config = merged(tpin_config);
            pgil::ImgPhyDataset ds = pgil::ImgPhyDataset::open(root);
            auto split = ds.splits().find(config.train_split);
            if (split == ds.splits().end())
                throw std::runtime_error("train-pin: unknown split " + config.train_split);
            std::map<std::string, int> label_of;
            for (const pgil::PatchRecord& r : ds.manifest().records) label_of[r.id] = r.label;

            std::vector<pgil::Raster> images;
            std::vector<int> labels;
            for (const std::string& id : split->second) {
                images.push_back(ds.load_amplitude(id, config.amp_multilook));
                labels.push_back(label_of.at(id));
            }
            pgil::InjectionSource source;
            pgil::PgnModel pgn;
            std::set<int> sites;
            pgil::TrainConfig tc = config.pin_train_config();
            std::vector<pgil::BoTVector> guidance;
            if (!pgn_ckpt.empty()) {
                pgn = pgil::load_pgn(pgn_ckpt);
                source.pgn = &pgn;
                sites = std::set<int>(config.sites.begin(), config.sites.end());
                if (tc.sal) {
                    auto bots = pgil::load_bots(ds);
                    for (const std::string& id : split->second) guidance.push_back(bots.at(id));
                }
            } else {
                tc.sal = false;
            }
            pgil::PinModel pin = pgil::train_pin(
                images, labels, static_cast<int>(ds.manifest().class_names.size()), sites, source,
                guidance.empty() ? nullptr : &guidance, config.net_profile(), tc);
            if (pin_ckpt_out.empty())
                pin_ckpt_out = (fs::path(root) / "models" /
                                ("cli-pin-seed" + std::to_string(config.seed) + ".bin"))
                                   .string();
            fs::create_directories(fs::path(pin_ckpt_out).parent_path());
            pgil::save_pin(pin, pin_ckpt_out);
            emit({{"command", "train-pin"},
                  {"checkpoint", pin_ckpt_out},
                  {"checkpoint_hash", pgil::content_hash_file(pin_ckpt_out)}},
                 out_path);
            return 0;
        }
        if (*eval) {
            pgil::RunConfig config = merged(eval_config);
            pgil::ImgPhyDataset ds = pgil::ImgPhyDataset::open(root);
            pgil::PinModel pin = pgil::load_pin(eval_pin);
            pgil::PgnModel pgn;
            pgil::InjectionSource source;
            if (!eval_pgn.empty()) {
                pgn = pgil::load_pgn(eval_pgn);
                source.pgn = &pgn;
            }
            std::map<std::string, int> label_of;
            for (const pgil::PatchRecord& r : ds.manifest().records) label_of[r.id] = r.label;
            std::vector<pgil::Raster> images;
            std::vector<int> truth;
            for (const std::string& id : ds.splits().at("test")) {
                images.push_back(ds.load_amplitude(id, config.amp_multilook));
                truth.push_back(label_of.at(id));
            }
            std::vector<int> pred = pgil::predict_pin(pin, images, source);
            pgil::MetricsReport rep = pgil::classification_report(pred, truth);
            emit({{"command", "evaluate"},
                  {"test", pgil::detail::report_to_json(rep)},
                  {"pin_hash", pgil::content_hash_file(eval_pin)}},
                 out_path);
            return 0;
        }
        if (*run) {
            pgil::RunConfig config = merged(run_config);
            pgil::ImgPhyDataset ds = pgil::ImgPhyDataset::open(root);
            if (ds.manifest().phy_provenance == "pending") pgil::run_xm(ds, config);
            bool needs_bots = config.mode != "baseline-cnn";
            if (needs_bots) pgil::run_encode(ds, config, !run_fresh_encode);
            pgil::RunReport report = pgil::run_experiment(ds, config);
            emit(report.to_json(), out_path);
            return 0;
        }
        if (*rep) {
            std::ifstream in(report_in);
            if (!in) throw std::runtime_error("cannot open report " + report_in);
            json j;
            in >> j;
            if (report_json) {
                emit(j, out_path);
                return 0;
            }
            std::string summary;
            summary += "mode:  " + j.at("mode").get<std::string>() + "\n";
            summary += "seed:  " + std::to_string(j.at("seed").get<std::uint64_t>()) + "\n";
            if (j.at("metrics").contains("test")) {
                const json& t = j["metrics"]["test"];
                summary += "test OA:       " + std::to_string(t.at("overall_accuracy").get<double>()) + "\n";
                summary += "test macro-F1: " + std::to_string(t.at("macro_f1").get<double>()) + "\n";
            }
            if (j.at("metrics").contains("probe")) {
                const json& p = j["metrics"]["probe"];
                summary += "probe OA:      " + std::to_string(p.at("overall_accuracy").get<double>()) + "\n";
            }
            if (j.at("metrics").contains("silhouette_pgn"))
                summary += "silhouette:    " +
                           std::to_string(j["metrics"]["silhouette_pgn"].get<double>()) + "\n";
            for (const auto& s : j.at("stages"))
                summary += "stage " + s.at("stage").get<std::string>() + ": " +
                           std::to_string(s.at("seconds").get<double>()) + "s\n";
            if (out_path.empty())
                std::cout << summary;
            else
                std::ofstream(out_path) << summary;
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
