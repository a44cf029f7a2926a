#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgil/benchmark.hpp"
#include "pgil/checkpoint.hpp"
#include "pgil/dataset.hpp"
#include "pgil/eval.hpp"
#include "pgil/h_alpha.hpp"
#include "pgil/pgil_net.hpp"
#include "pgil/tfa.hpp"
#include "pgil/topic_model.hpp"
#include "pgil/wishart.hpp"

namespace pgil {

inline const std::vector<std::string>& experiment_modes() {
    static const std::vector<std::string> modes = {
        "baseline-cnn",   "pgn-probe",         "pgil-full",        "no-sal",
        "direct-bot-injection", "raw-label-guidance", "pgn-finetune-only"};
    return modes;
}

// Every stage's hyperparameters; validated against the schema before any
// stage runs.
struct RunConfig {
    std::string mode = "pgil-full";
    std::string profile = "desk";
    std::string train_split = "train-5";
    std::uint64_t seed = 0;
    bool paper_protocol = false;
    std::string pgn_checkpoint;  // reuse a trained guided network when set
    int amp_multilook = 3;

    // explainable models
    int wishart_window = 7;
    int wishart_max_iter = 10;
    double wishart_min_changed = 1e-3;
    int tfa_bank = 3;
    double tfa_bandwidth = 1.0 / 3.0;
    std::string tfa_window = "rectangular";
    int tfa_segment = 16;
    int tfa_stride = 4;
    int n_s_tfa = 15;

    // topic encoding
    int word_crop = 8;
    int word_step = 4;
    int crops_per_patch = 100;
    int n_v = 500;
    int n_topics = 175;
    double lda_alpha = -1;  // -1 resolves to 50/K
    double lda_beta = 0.01;
    int lda_iters = 500;
    int infer_burnin = 50;
    int infer_samples = 50;

    // guided network
    double pgn_lr = 0.05;
    double momentum = 0.9;
    int pgn_epochs = 20;
    int pgn_batch = 32;
    double mask_alpha = 0.1;
    double mask_pa = 0.9;
    std::string constraint = "soft";

    // injected network
    double pin_lr = 0.001;
    int pin_epochs = 50;
    int pin_batch = 16;
    double pin_lr_min = 1e-8;
    int cosine_floor = 3;
    double lambda = 0.1;
    bool sal = true;
    double sal_lr_scale = 0.1;
    std::vector<int> sites = {2, 3, 4};

    // probe
    double probe_reg = 1e-3;
    int probe_epochs = 60;

    double resolved_lda_alpha() const {
        return lda_alpha > 0 ? lda_alpha : 50.0 / static_cast<double>(n_topics);
    }

    void validate() const {
        bool known_mode = false;
        for (const std::string& m : experiment_modes()) known_mode |= (m == mode);
        if (!known_mode) throw std::invalid_argument("RunConfig: unknown mode '" + mode + "'");
        if (profile != "desk" && profile != "full")
            throw std::invalid_argument("RunConfig: unknown profile '" + profile + "'");
        if (n_topics < 2) throw std::invalid_argument("RunConfig: n_topics must be >= 2");
        if (n_v < 1) throw std::invalid_argument("RunConfig: n_v must be >= 1");
        if (lambda < 0) throw std::invalid_argument("RunConfig: lambda must be >= 0");
        if (pgn_lr <= 0 || pin_lr <= 0)
            throw std::invalid_argument("RunConfig: learning rates must be > 0");
        if (mask_alpha < 0 || mask_alpha > 1 || mask_pa < 0 || mask_pa > 1)
            throw std::invalid_argument("RunConfig: mask parameters must lie in [0,1]");
        if (wishart_window < 1 || wishart_window % 2 == 0)
            throw std::invalid_argument("RunConfig: wishart_window must be odd");
        for (int s : sites)
            if (s < 2 || s > 4)
                throw std::invalid_argument("RunConfig: injection sites must be in {2,3,4}");
        constraint_from_string(constraint);
        filter_window_from_string(tfa_window);
        if (pgn_epochs < 1 || pin_epochs < 1 || pgn_batch < 1 || pin_batch < 1)
            throw std::invalid_argument("RunConfig: epochs and batch sizes must be >= 1");
    }

    json to_json() const {
        return json{{"mode", mode},
                    {"profile", profile},
                    {"train_split", train_split},
                    {"seed", seed},
                    {"paper_protocol", paper_protocol},
                    {"pgn_checkpoint", pgn_checkpoint},
                    {"amp_multilook", amp_multilook},
                    {"wishart_window", wishart_window},
                    {"wishart_max_iter", wishart_max_iter},
                    {"wishart_min_changed", wishart_min_changed},
                    {"tfa_bank", tfa_bank},
                    {"tfa_bandwidth", tfa_bandwidth},
                    {"tfa_window", tfa_window},
                    {"tfa_segment", tfa_segment},
                    {"tfa_stride", tfa_stride},
                    {"n_s_tfa", n_s_tfa},
                    {"word_crop", word_crop},
                    {"word_step", word_step},
                    {"crops_per_patch", crops_per_patch},
                    {"n_v", n_v},
                    {"n_topics", n_topics},
                    {"lda_alpha", lda_alpha},
                    {"lda_beta", lda_beta},
                    {"lda_iters", lda_iters},
                    {"infer_burnin", infer_burnin},
                    {"infer_samples", infer_samples},
                    {"pgn_lr", pgn_lr},
                    {"momentum", momentum},
                    {"pgn_epochs", pgn_epochs},
                    {"pgn_batch", pgn_batch},
                    {"mask_alpha", mask_alpha},
                    {"mask_pa", mask_pa},
                    {"constraint", constraint},
                    {"pin_lr", pin_lr},
                    {"pin_epochs", pin_epochs},
                    {"pin_batch", pin_batch},
                    {"pin_lr_min", pin_lr_min},
                    {"cosine_floor", cosine_floor},
                    {"lambda", lambda},
                    {"sal", sal},
                    {"sal_lr_scale", sal_lr_scale},
                    {"sites", sites},
                    {"probe_reg", probe_reg},
                    {"probe_epochs", probe_epochs}};
    }

    static RunConfig from_json(const json& j) {
        RunConfig c;
        json known = c.to_json();
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!known.contains(it.key()))
                throw std::invalid_argument("RunConfig: unknown key '" + it.key() + "'");
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("mode", c.mode);
        get("profile", c.profile);
        get("train_split", c.train_split);
        get("seed", c.seed);
        get("paper_protocol", c.paper_protocol);
        get("pgn_checkpoint", c.pgn_checkpoint);
        get("amp_multilook", c.amp_multilook);
        get("wishart_window", c.wishart_window);
        get("wishart_max_iter", c.wishart_max_iter);
        get("wishart_min_changed", c.wishart_min_changed);
        get("tfa_bank", c.tfa_bank);
        get("tfa_bandwidth", c.tfa_bandwidth);
        get("tfa_window", c.tfa_window);
        get("tfa_segment", c.tfa_segment);
        get("tfa_stride", c.tfa_stride);
        get("n_s_tfa", c.n_s_tfa);
        get("word_crop", c.word_crop);
        get("word_step", c.word_step);
        get("crops_per_patch", c.crops_per_patch);
        get("n_v", c.n_v);
        get("n_topics", c.n_topics);
        get("lda_alpha", c.lda_alpha);
        get("lda_beta", c.lda_beta);
        get("lda_iters", c.lda_iters);
        get("infer_burnin", c.infer_burnin);
        get("infer_samples", c.infer_samples);
        get("pgn_lr", c.pgn_lr);
        get("momentum", c.momentum);
        get("pgn_epochs", c.pgn_epochs);
        get("pgn_batch", c.pgn_batch);
        get("mask_alpha", c.mask_alpha);
        get("mask_pa", c.mask_pa);
        get("constraint", c.constraint);
        get("pin_lr", c.pin_lr);
        get("pin_epochs", c.pin_epochs);
        get("pin_batch", c.pin_batch);
        get("pin_lr_min", c.pin_lr_min);
        get("cosine_floor", c.cosine_floor);
        get("lambda", c.lambda);
        get("sal", c.sal);
        get("sal_lr_scale", c.sal_lr_scale);
        get("sites", c.sites);
        get("probe_reg", c.probe_reg);
        get("probe_epochs", c.probe_epochs);
        c.validate();
        return c;
    }

    NetProfile net_profile() const {
        return profile == "full" ? NetProfile::full() : NetProfile::desk();
    }

    TrainConfig pgn_train_config() const {
        TrainConfig t;
        t.lr = pgn_lr;
        t.momentum = momentum;
        t.epochs = pgn_epochs;
        t.batch = pgn_batch;
        t.schedule = "fixed";
        t.mask_alpha = mask_alpha;
        t.mask_pa = mask_pa;
        t.constraint = constraint_from_string(constraint);
        t.seed = seed;
        return t;
    }

    TrainConfig pin_train_config() const {
        TrainConfig t;
        t.lr = pin_lr;
        t.momentum = momentum;
        t.epochs = pin_epochs;
        t.batch = pin_batch;
        t.schedule = "cosine";
        t.lr_min = pin_lr_min;
        t.cosine_floor_epochs = cosine_floor;
        t.lambda = lambda;
        t.mask_alpha = mask_alpha;
        t.mask_pa = mask_pa;
        t.constraint = constraint_from_string(constraint);
        t.sal = sal;
        t.sal_lr_scale = sal_lr_scale;
        t.seed = seed;
        return t;
    }
};

struct StageTime {
    std::string name;
    double seconds = 0;
};

struct RunReport {
    std::string mode;
    std::uint64_t seed = 0;
    json config_echo;
    std::vector<StageTime> stages;
    std::map<std::string, std::string> artifact_hashes;
    std::map<std::string, std::string> artifact_paths;
    json metrics;

    json to_json() const {
        json st = json::array();
        for (const StageTime& s : stages) st.push_back({{"stage", s.name}, {"seconds", s.seconds}});
        return json{{"mode", mode},          {"seed", seed},
                    {"config", config_echo}, {"stages", st},
                    {"metrics", metrics},    {"artifact_hashes", artifact_hashes},
                    {"artifact_paths", artifact_paths}};
    }
};

namespace detail {

class StageTimer {
public:
    StageTimer(std::vector<StageTime>& sink, std::string name)
        : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        sink_.push_back({name_, secs});
    }

private:
    std::vector<StageTime>& sink_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// f_XM over a dataset: H/alpha-Wishart zone refinement for polarimetric data,
// dataset-wide time-frequency clustering for single-channel data. Fills the
// Phy half in place.
inline void run_xm(ImgPhyDataset& ds, const RunConfig& config) {
    const DatasetManifest& m = ds.manifest();
    if (!m.img_complex)
        throw std::runtime_error("run_xm: dataset holds amplitude data, no complex input");

    if (m.img_channels >= 2) {
        ds.manifest().n_s = 9;
        ds.manifest().phy_height = m.img_height;
        ds.manifest().phy_width = m.img_width;
        for (const PatchRecord& r : m.records) {
            try {
                PolScene scene = ds.load_scene(r.id);
                CoherencyField field = estimate_coherency(scene, config.wishart_window);
                ScatteringLabelMap init = h_alpha_zone_map(field);
                WishartResult res = wishart_classify(field, init, config.wishart_max_iter,
                                                     config.wishart_min_changed);
                ds.write_phy(r.id, res.labels);
            } catch (const std::exception& e) {
                throw std::runtime_error("run_xm: patch " + r.id + ": " + e.what());
            }
        }
        ds.manifest().phy_provenance = "h-alpha-wishart";
    } else {
        // single channel: cluster sub-band patterns over the whole dataset so
        // scattering class ids mean the same thing in every patch
        FilterBank bank = build_filter_bank(config.tfa_bank, config.tfa_bank,
                                            config.tfa_bandwidth,
                                            filter_window_from_string(config.tfa_window));
        const int stride = config.tfa_stride;
        const int gh = (m.img_height + stride - 1) / stride;
        const int gw = (m.img_width + stride - 1) / stride;

        std::vector<std::vector<double>> patterns;
        for (const PatchRecord& r : m.records) {
            try {
                PolScene scene = ds.load_scene(r.id);
                const ComplexImage& img = scene.images[0];
                for (int gi = 0; gi < gh; ++gi)
                    for (int gj = 0; gj < gw; ++gj) {
                        int row = std::min(m.img_height - 1, gi * stride + stride / 2);
                        int col = std::min(m.img_width - 1, gj * stride + stride / 2);
                        SubbandPattern p =
                            subband_pattern(img, row, col, config.tfa_segment, bank);
                        double norm = 0;
                        for (double v : p.values) norm += v * v;
                        norm = std::sqrt(norm);
                        if (norm > 0)
                            for (double& v : p.values) v /= norm;
                        patterns.push_back(std::move(p.values));
                    }
            } catch (const std::exception& e) {
                throw std::runtime_error("run_xm: patch " + r.id + ": " + e.what());
            }
        }
        KMeansResult km = kmeans(patterns, config.n_s_tfa, config.seed);

        ds.manifest().n_s = config.n_s_tfa;
        ds.manifest().phy_height = gh;
        ds.manifest().phy_width = gw;
        ds.manifest().phy_provenance = "tfa";
        std::size_t cursor = 0;
        for (const PatchRecord& r : m.records) {
            ScatteringLabelMap map(gh, gw, config.n_s_tfa, "tfa");
            for (std::size_t i = 0; i < map.labels.size(); ++i)
                map.labels[i] = static_cast<std::uint8_t>(km.labels[cursor++]);
            ds.write_phy(r.id, map);
        }
    }
    ds.write_manifest();
}

struct EncodeResult {
    Vocabulary vocab;
    LdaModel lda;
    std::map<std::string, BoTVector> bots;
    double mean_corpus_sparsity = 0;
    bool from_cache = false;
};

inline std::vector<std::string> corpus_ids(const ImgPhyDataset& ds, const RunConfig& config) {
    std::vector<std::string> ids;
    for (const PatchRecord& r : ds.manifest().records)
        if (config.paper_protocol || r.split != "test") ids.push_back(r.id);
    return ids;
}

// y_phy = G(L(x)): vocabulary and LDA trained on the corpus (test labels are
// never read; test images join only under the paper protocol), topic mixtures
// inferred and persisted for every patch.
inline EncodeResult run_encode(ImgPhyDataset& ds, const RunConfig& config, bool use_cache = false) {
    const DatasetManifest& m = ds.manifest();
    if (m.phy_provenance == "pending")
        throw std::runtime_error("run_encode: Phy rasters missing, run the explainable model first");

    std::filesystem::path dir = ds.root() / "encode";
    std::filesystem::create_directories(dir);
    std::filesystem::path vocab_path = dir / "vocab.bin";
    std::filesystem::path lda_path = dir / "lda.bin";
    std::filesystem::path bots_path = dir / "bots.csv";

    EncodeResult out;
    std::vector<std::string> corpus = corpus_ids(ds, config);
    if (corpus.empty()) throw std::runtime_error("run_encode: empty corpus");

    if (use_cache && std::filesystem::exists(vocab_path) && std::filesystem::exists(lda_path)) {
        out.vocab = load_vocabulary(vocab_path);
        out.lda = load_lda(lda_path);
        out.from_cache = true;
    } else {
        std::vector<WordVector> words;
        words.reserve(corpus.size() * config.crops_per_patch);
        Rng word_root(config.seed, 0xE0D0);
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            ScatteringLabelMap map = ds.read_phy(corpus[i]);
            Rng rng = word_root.substream(i);
            auto w = extract_word_vectors(map, config.word_crop, config.crops_per_patch, rng);
            words.insert(words.end(), w.begin(), w.end());
        }
        out.vocab = build_vocabulary(words, config.n_v, config.seed);

        Corpus lda_corpus;
        lda_corpus.n_words = out.vocab.size();
        for (const std::string& id : corpus)
            lda_corpus.docs.push_back(
                encode_document(ds.read_phy(id), out.vocab, config.word_crop, config.word_step));
        out.lda = train_lda(lda_corpus, config.n_topics, config.resolved_lda_alpha(),
                            config.lda_beta, config.lda_iters, config.seed);
        save_vocabulary(out.vocab, config.seed, vocab_path);
        save_lda(out.lda, lda_path);
    }

    // BoT for every patch, inferred against the corpus-trained model
    std::ofstream csv(bots_path);
    csv << "id";
    for (int k = 0; k < out.lda.n_topics; ++k) csv << ",phi_" << k;
    csv << "\n";
    csv.precision(17);
    double sparsity_sum = 0;
    std::size_t sparsity_count = 0;
    std::set<std::string> corpus_set(corpus.begin(), corpus.end());
    for (std::size_t i = 0; i < m.records.size(); ++i) {
        const std::string& id = m.records[i].id;
        Document doc = encode_document(ds.read_phy(id), out.vocab, config.word_crop,
                                       config.word_step);
        BoTVector bot = infer_bot(doc, out.lda, config.infer_burnin, config.infer_samples,
                                  mix64(config.seed ^ (0xB07ULL + i)));
        if (corpus_set.count(id)) {
            sparsity_sum += bot_sparsity(bot);
            ++sparsity_count;
        }
        csv << id;
        for (double v : bot) csv << "," << v;
        csv << "\n";
        out.bots[id] = std::move(bot);
    }
    out.mean_corpus_sparsity = sparsity_sum / static_cast<double>(sparsity_count);
    return out;
}

inline std::map<std::string, BoTVector> load_bots(const ImgPhyDataset& ds) {
    std::ifstream csv(ds.root() / "encode" / "bots.csv");
    if (!csv) throw std::runtime_error("load_bots: missing bots.csv, run the encoder first");
    std::map<std::string, BoTVector> out;
    std::string line;
    std::getline(csv, line);  // header
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::size_t pos = line.find(',');
        std::string id = line.substr(0, pos);
        BoTVector bot;
        while (pos != std::string::npos) {
            std::size_t next = line.find(',', pos + 1);
            bot.push_back(std::stod(line.substr(pos + 1, next - pos - 1)));
            pos = next;
        }
        out[id] = std::move(bot);
    }
    return out;
}

namespace detail {

struct ExperimentData {
    std::vector<std::string> corpus_ids, labeled_ids, test_ids;
    std::vector<Raster> corpus_images, labeled_images, test_images;
    std::vector<int> labeled_labels, test_labels;
    std::vector<BoTVector> corpus_bots, labeled_bots;
    std::map<std::string, BoTVector> all_bots;
    int n_classes = 0;
};

inline ExperimentData gather_experiment_data(ImgPhyDataset& ds, const RunConfig& config,
                                             bool need_bots) {
    ExperimentData d;
    const DatasetManifest& m = ds.manifest();
    d.n_classes = static_cast<int>(m.class_names.size());

    std::map<std::string, const PatchRecord*> by_id;
    for (const PatchRecord& r : m.records) by_id[r.id] = &r;

    auto split_it = ds.splits().find(config.train_split);
    if (split_it == ds.splits().end())
        throw std::runtime_error("run_experiment: unknown train split '" + config.train_split + "'");
    d.labeled_ids = split_it->second;
    auto test_it = ds.splits().find("test");
    if (test_it == ds.splits().end())
        throw std::runtime_error("run_experiment: dataset has no test split");
    d.test_ids = test_it->second;
    d.corpus_ids = corpus_ids(ds, config);

    if (need_bots) d.all_bots = load_bots(ds);

    for (const std::string& id : d.corpus_ids) {
        d.corpus_images.push_back(ds.load_amplitude(id, config.amp_multilook));
        if (need_bots) d.corpus_bots.push_back(d.all_bots.at(id));
    }
    for (const std::string& id : d.labeled_ids) {
        d.labeled_images.push_back(ds.load_amplitude(id, config.amp_multilook));
        int label = by_id.at(id)->label;
        if (label < 0) throw std::runtime_error("run_experiment: unlabeled patch in train split");
        d.labeled_labels.push_back(label);
        if (need_bots) d.labeled_bots.push_back(d.all_bots.at(id));
    }
    for (const std::string& id : d.test_ids) {
        d.test_images.push_back(ds.load_amplitude(id, config.amp_multilook));
        d.test_labels.push_back(by_id.at(id)->label);
    }
    return d;
}

inline int fpa_spatial(const NetProfile& p, int input_hw) {
    int s = input_hw / p.stem_stride;
    if (p.stem_pool > 1) s /= p.stem_pool;
    return s / 4;  // stages 2 and 3 each halve
}

inline json report_to_json(const MetricsReport& r) {
    return json{{"overall_accuracy", r.overall_accuracy},
                {"macro_f1", r.macro_f1},
                {"precision", r.precision},
                {"recall", r.recall},
                {"f1", r.f1},
                {"confusion", r.confusion},
                {"zero_division", r.zero_division}};
}

// silhouette of pooled features under k-means clusters of the BoT vectors
inline double physics_awareness_silhouette(const FeatureMatrix& features,
                                           const std::vector<BoTVector>& bots, int k,
                                           std::uint64_t seed) {
    FeatureMatrix bot_mat(bots.begin(), bots.end());
    std::vector<int> clusters = kmeans_cluster(bot_mat, k, seed);
    return silhouette_score(features, clusters);
}

inline std::vector<BoTVector> phy_histograms(ImgPhyDataset& ds,
                                             const std::vector<std::string>& ids) {
    std::vector<BoTVector> out;
    for (const std::string& id : ids) {
        ScatteringLabelMap map = ds.read_phy(id);
        out.push_back(label_histogram(map, 0, 0, map.height));
    }
    return out;
}

}  // namespace detail

// One reproducible experiment: the selected pipeline mode end to end, with
// metrics, stage timings and content hashes of every consumed artifact.
inline RunReport run_experiment(ImgPhyDataset& ds, const RunConfig& config) {
    config.validate();
    ds.validate();

    RunReport report;
    report.mode = config.mode;
    report.seed = config.seed;
    report.config_echo = config.to_json();
    report.artifact_hashes["dataset_manifest"] =
        content_hash_file(ds.root() / "manifest.json");

    const bool require_bots = config.mode == "pgn-probe" || config.mode == "pgil-full" ||
                              config.mode == "no-sal" || config.mode == "direct-bot-injection" ||
                              config.mode == "pgn-finetune-only";
    const bool bots_available = std::filesystem::exists(ds.root() / "encode" / "bots.csv");
    const bool need_bots = require_bots || (config.mode == "baseline-cnn" && bots_available);
    const bool need_guidance = config.mode != "baseline-cnn";

    detail::ExperimentData data;
    {
        detail::StageTimer t(report.stages, "load");
        data = detail::gather_experiment_data(ds, config, need_bots);
    }
    if (need_bots) {
        report.artifact_hashes["vocabulary"] = content_hash_file(ds.root() / "encode/vocab.bin");
        report.artifact_hashes["lda"] = content_hash_file(ds.root() / "encode/lda.bin");
        report.artifact_hashes["bots"] = content_hash_file(ds.root() / "encode/bots.csv");
    }

    std::filesystem::path model_dir = ds.root() / "models";
    std::filesystem::create_directories(model_dir);
    std::string tag = config.mode + "-" + config.constraint + "-" + config.train_split + "-sites";
    for (int s : config.sites) tag += std::to_string(s);
    tag += "-seed" + std::to_string(config.seed);

    const NetProfile profile = config.net_profile();
    json metrics;

    // guidance vectors: BoT mixtures, or raw label histograms for the
    // raw-label-guidance ablation
    std::vector<BoTVector> corpus_guidance, labeled_guidance;
    if (config.mode == "raw-label-guidance") {
        corpus_guidance = detail::phy_histograms(ds, data.corpus_ids);
        labeled_guidance = detail::phy_histograms(ds, data.labeled_ids);
    } else if (need_bots) {
        corpus_guidance = data.corpus_bots;
        labeled_guidance = data.labeled_bots;
    }

    // ---- guided network (when the mode uses one) ----
    PgnModel pgn;
    bool have_pgn = false;
    if (config.mode != "baseline-cnn" && config.mode != "direct-bot-injection") {
        detail::StageTimer t(report.stages, "train-pgn");
        if (!config.pgn_checkpoint.empty()) {
            pgn = load_pgn(config.pgn_checkpoint);
            report.artifact_hashes["pgn_checkpoint_in"] = content_hash_file(config.pgn_checkpoint);
        } else {
            pgn = train_pgn(data.corpus_images, corpus_guidance, profile,
                            config.pgn_train_config());
            std::filesystem::path p = model_dir / (tag + "-pgn.bin");
            save_pgn(pgn, p);
            report.artifact_hashes["pgn_checkpoint"] = content_hash_file(p);
            report.artifact_paths["pgn_checkpoint"] = p.string();
        }
        have_pgn = true;
    }

    // probe and physics-awareness metrics on the guided features
    if (have_pgn && need_bots) {
        detail::StageTimer t(report.stages, "probe");
        FeatureMatrix labeled_feats = pool_features(extract_fpa(pgn, data.labeled_images));
        FeatureMatrix test_feats = pool_features(extract_fpa(pgn, data.test_images));
        ProbeModel probe = fit_linear_probe(labeled_feats, data.labeled_labels, config.probe_reg,
                                            config.probe_epochs, config.seed);
        MetricsReport probe_rep =
            classification_report(probe.predict_all(test_feats), data.test_labels);
        metrics["probe"] = detail::report_to_json(probe_rep);

        FeatureMatrix corpus_feats = pool_features(extract_fpa(pgn, data.corpus_images));
        metrics["silhouette_pgn"] = detail::physics_awareness_silhouette(
            corpus_feats, data.corpus_bots, data.n_classes, config.seed);
    }

    if (config.mode == "pgn-probe") {
        report.metrics = metrics;
        return report;
    }

    // ---- injected classifier ----
    TrainConfig pin_cfg = config.pin_train_config();
    std::set<int> sites(config.sites.begin(), config.sites.end());
    InjectionSource source;
    std::vector<Tensor> fixed_train, fixed_test;

    if (config.mode == "baseline-cnn" || config.mode == "pgn-finetune-only") {
        sites.clear();
        pin_cfg.sal = false;
    } else if (config.mode == "direct-bot-injection") {
        pin_cfg.sal = false;
        const int s = detail::fpa_spatial(profile, ds.manifest().img_height);
        const int k = static_cast<int>(data.labeled_bots[0].size());
        auto broadcast = [&](const BoTVector& bot) {
            Tensor t(Shape(1, k, s, s));
            for (int c = 0; c < k; ++c)
                for (int i = 0; i < s * s; ++i)
                    t.data[static_cast<std::size_t>(c) * s * s + i] = bot[c];
            return t;
        };
        for (const BoTVector& b : data.labeled_bots) fixed_train.push_back(broadcast(b));
        for (const std::string& id : data.test_ids) fixed_test.push_back(broadcast(data.all_bots.at(id)));
        source.fixed = &fixed_train;
    } else if (config.mode == "no-sal") {
        pin_cfg.sal = false;
        source.pgn = &pgn;
    } else {
        source.pgn = &pgn;  // pgil-full, raw-label-guidance keep SAL per config
    }

    PinModel pin;
    {
        detail::StageTimer t(report.stages, "train-pin");
        if (config.mode == "pgn-finetune-only") {
            pin = PinModel::make(profile, data.n_classes, {}, 0, config.seed);
            transfer_backbone(pin, pgn);
            InjectionSource none;
            TrainConfig ft_cfg = pin_cfg;
            ft_cfg.sal = false;
            pin = train_pin_on(std::move(pin), data.labeled_images, data.labeled_labels, none,
                               nullptr, ft_cfg);
        } else {
            pin = train_pin(data.labeled_images, data.labeled_labels, data.n_classes, sites,
                            source, need_guidance && pin_cfg.sal ? &labeled_guidance : nullptr,
                            profile, pin_cfg);
        }
        std::filesystem::path p = model_dir / (tag + "-pin.bin");
        save_pin(pin, p);
        report.artifact_hashes["pin_checkpoint"] = content_hash_file(p);
        report.artifact_paths["pin_checkpoint"] = p.string();
    }

    // ---- evaluation ----
    {
        detail::StageTimer t(report.stages, "evaluate");
        InjectionSource eval_source = source;
        if (source.fixed) eval_source.fixed = &fixed_test;
        std::vector<int> pred = predict_pin(pin, data.test_images, eval_source);
        MetricsReport rep = classification_report(pred, data.test_labels);
        metrics["test"] = detail::report_to_json(rep);

        if (config.mode == "baseline-cnn" && !data.corpus_bots.empty()) {
            FeatureMatrix corpus_feats =
                pool_features(extract_pin_stage3(pin, data.corpus_images));
            metrics["silhouette_baseline"] = detail::physics_awareness_silhouette(
                corpus_feats, data.corpus_bots, data.n_classes, config.seed);
        }
    }

    report.metrics = metrics;
    return report;
}

}  // namespace pgil
