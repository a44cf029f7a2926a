#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgil/pgil_net.hpp"

namespace pgil {

namespace detail {

inline nlohmann::json profile_to_json(const NetProfile& p) {
    return {{"name", p.name},
            {"in_channels", p.in_channels},
            {"stem_kernel", p.stem_kernel},
            {"stem_stride", p.stem_stride},
            {"stem_pad", p.stem_pad},
            {"stem_pool", p.stem_pool},
            {"widths", p.widths},
            {"blocks_per_stage", p.blocks_per_stage}};
}

inline NetProfile profile_from_json(const nlohmann::json& j) {
    NetProfile p;
    p.name = j.at("name").get<std::string>();
    p.in_channels = j.at("in_channels").get<int>();
    p.stem_kernel = j.at("stem_kernel").get<int>();
    p.stem_stride = j.at("stem_stride").get<int>();
    p.stem_pad = j.at("stem_pad").get<int>();
    p.stem_pool = j.at("stem_pool").get<int>();
    auto w = j.at("widths").get<std::vector<int>>();
    for (int i = 0; i < 4; ++i) p.widths[i] = w[i];
    p.blocks_per_stage = j.at("blocks_per_stage").get<int>();
    return p;
}

inline void write_blob(std::ofstream& out, const std::string& name, const Tensor& t) {
    std::uint32_t name_len = static_cast<std::uint32_t>(name.size());
    std::uint64_t count = t.numel();
    out.write(reinterpret_cast<const char*>(&name_len), sizeof name_len);
    out.write(name.data(), name_len);
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
}

inline void read_blob(std::ifstream& in, const std::string& want_name, Tensor& t) {
    std::uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof name_len);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    if (!in || name != want_name || count != t.numel())
        throw std::runtime_error("checkpoint: expected tensor '" + want_name + "' of " +
                                 std::to_string(t.numel()) + " values, found '" + name + "' of " +
                                 std::to_string(count));
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
}

inline void write_header(std::ofstream& out, const char* magic, const nlohmann::json& header) {
    out.write(magic, 8);
    std::string h = header.dump();
    std::uint64_t len = h.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
}

inline nlohmann::json read_header(std::ifstream& in, const char* magic) {
    char got[8];
    in.read(got, 8);
    if (!in || std::string(got, 8) != std::string(magic, 8))
        throw std::runtime_error("checkpoint: bad magic, expected " + std::string(magic, 8));
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    std::string h(len, '\0');
    in.read(h.data(), static_cast<std::streamsize>(len));
    return nlohmann::json::parse(h);
}

}  // namespace detail

inline void save_pgn(const PgnModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_pgn: cannot write " + path.string());
    nlohmann::json header{{"kind", "pgn"},
                          {"format", 1},
                          {"profile", detail::profile_to_json(model.profile)},
                          {"n_topics", model.n_topics},
                          {"input_mean", model.input_mean},
                          {"input_std", model.input_std},
                          {"seed", model.seed},
                          {"epochs", model.trained_epochs}};
    detail::write_header(out, "PGILPGN1", header);
    for (const ParamRef& p : model.params()) detail::write_blob(out, p.name, p.node->value);
    for (BufferRef& b : const_cast<PgnModel&>(model).buffers())
        detail::write_blob(out, b.name, *b.tensor);
}

inline PgnModel load_pgn(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_pgn: cannot open " + path.string());
    nlohmann::json header = detail::read_header(in, "PGILPGN1");
    if (header.at("kind") != "pgn") throw std::runtime_error("load_pgn: not a pgn checkpoint");
    PgnModel model = PgnModel::make(detail::profile_from_json(header.at("profile")),
                                    header.at("n_topics").get<int>(),
                                    header.at("seed").get<std::uint64_t>());
    model.input_mean = header.at("input_mean").get<double>();
    model.input_std = header.at("input_std").get<double>();
    model.trained_epochs = header.at("epochs").get<int>();
    for (const ParamRef& p : model.params()) detail::read_blob(in, p.name, p.node->value);
    for (BufferRef& b : model.buffers()) detail::read_blob(in, b.name, *b.tensor);
    return model;
}

inline void save_pin(const PinModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_pin: cannot write " + path.string());
    std::vector<int> sites(model.active_sites.begin(), model.active_sites.end());
    nlohmann::json header{{"kind", "pin"},
                          {"format", 1},
                          {"profile", detail::profile_to_json(model.profile)},
                          {"n_classes", model.n_classes},
                          {"fpa_channels", model.fpa_channels},
                          {"sites", sites},
                          {"input_mean", model.input_mean},
                          {"input_std", model.input_std},
                          {"seed", model.seed},
                          {"epochs", model.trained_epochs}};
    detail::write_header(out, "PGILPIN1", header);
    for (const ParamRef& p : model.params()) detail::write_blob(out, p.name, p.node->value);
    for (BufferRef& b : const_cast<PinModel&>(model).buffers())
        detail::write_blob(out, b.name, *b.tensor);
}

inline PinModel load_pin(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_pin: cannot open " + path.string());
    nlohmann::json header = detail::read_header(in, "PGILPIN1");
    if (header.at("kind") != "pin") throw std::runtime_error("load_pin: not a pin checkpoint");
    auto sites_vec = header.at("sites").get<std::vector<int>>();
    std::set<int> sites(sites_vec.begin(), sites_vec.end());
    PinModel model = PinModel::make(detail::profile_from_json(header.at("profile")),
                                    header.at("n_classes").get<int>(), sites,
                                    header.at("fpa_channels").get<int>(),
                                    header.at("seed").get<std::uint64_t>());
    model.input_mean = header.at("input_mean").get<double>();
    model.input_std = header.at("input_std").get<double>();
    model.trained_epochs = header.at("epochs").get<int>();
    for (const ParamRef& p : model.params()) detail::read_blob(in, p.name, p.node->value);
    for (BufferRef& b : model.buffers()) detail::read_blob(in, b.name, *b.tensor);
    return model;
}

// Vocabulary and LDA model blobs: versioned binary with a JSON header.
inline void save_vocabulary(const Vocabulary& v, std::uint64_t seed,
                            const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_vocabulary: cannot write " + path.string());
    nlohmann::json header{{"kind", "vocabulary"},
                          {"format", 1},
                          {"n_s", v.n_s},
                          {"n_v", v.size()},
                          {"seed", seed},
                          {"duplicated_centers", v.duplicated_centers}};
    detail::write_header(out, "PGILVOC1", header);
    Tensor flat(Shape(v.size(), v.n_s));
    for (int c = 0; c < v.size(); ++c)
        for (int d = 0; d < v.n_s; ++d) flat.data[static_cast<std::size_t>(c) * v.n_s + d] = v.centers[c][d];
    detail::write_blob(out, "centers", flat);
}

inline Vocabulary load_vocabulary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_vocabulary: cannot open " + path.string());
    nlohmann::json header = detail::read_header(in, "PGILVOC1");
    Vocabulary v;
    v.n_s = header.at("n_s").get<int>();
    int n_v = header.at("n_v").get<int>();
    v.duplicated_centers = header.at("duplicated_centers").get<bool>();
    Tensor flat(Shape(n_v, v.n_s));
    detail::read_blob(in, "centers", flat);
    v.centers.assign(n_v, std::vector<double>(v.n_s));
    for (int c = 0; c < n_v; ++c)
        for (int d = 0; d < v.n_s; ++d) v.centers[c][d] = flat.data[static_cast<std::size_t>(c) * v.n_s + d];
    return v;
}

inline void save_lda(const LdaModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_lda: cannot write " + path.string());
    nlohmann::json header{{"kind", "lda"},        {"format", 1},
                          {"n_topics", m.n_topics}, {"n_words", m.n_words},
                          {"alpha", m.alpha},     {"beta", m.beta},
                          {"iterations", m.trained_iterations}, {"seed", m.seed}};
    detail::write_header(out, "PGILLDA1", header);
    Tensor flat(Shape(m.n_topics, m.n_words));
    flat.data = m.topic_word;
    detail::write_blob(out, "topic_word", flat);
}

inline LdaModel load_lda(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_lda: cannot open " + path.string());
    nlohmann::json header = detail::read_header(in, "PGILLDA1");
    LdaModel m;
    m.n_topics = header.at("n_topics").get<int>();
    m.n_words = header.at("n_words").get<int>();
    m.alpha = header.at("alpha").get<double>();
    m.beta = header.at("beta").get<double>();
    m.trained_iterations = header.at("iterations").get<int>();
    m.seed = header.at("seed").get<std::uint64_t>();
    Tensor flat(Shape(m.n_topics, m.n_words));
    detail::read_blob(in, "topic_word", flat);
    m.topic_word = std::move(flat.data);
    return m;
}

}  // namespace pgil
