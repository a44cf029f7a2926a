#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgil/image.hpp"
#include "pgil/sar_synth.hpp"

namespace pgil {

using json = nlohmann::json;

inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string content_hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("content_hash_file: cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

struct PatchRecord {
    std::string id;
    int label = -1;  // -1 = unlabeled
    std::string split = "unlabeled";  // train | test | unlabeled
};

struct DatasetManifest {
    int version = 1;
    int img_height = 0, img_width = 0, img_channels = 1;
    bool img_complex = false;
    int phy_height = 0, phy_width = 0, n_s = 0;
    std::string phy_provenance = "pending";
    std::vector<std::string> class_names;
    std::vector<PatchRecord> records;

    json to_json() const {
        json recs = json::array();
        for (const PatchRecord& r : records)
            recs.push_back({{"id", r.id}, {"label", r.label}, {"split", r.split}});
        return json{{"version", version},
                    {"img", {{"height", img_height},
                             {"width", img_width},
                             {"channels", img_channels},
                             {"complex", img_complex}}},
                    {"phy", {{"height", phy_height},
                             {"width", phy_width},
                             {"n_s", n_s},
                             {"provenance", phy_provenance}}},
                    {"class_names", class_names},
                    {"patch_count", records.size()},
                    {"records", recs}};
    }

    static DatasetManifest from_json(const json& j) {
        DatasetManifest m;
        m.version = j.at("version").get<int>();
        if (m.version != 1)
            throw std::runtime_error("Img-Phy manifest: unknown version " +
                                     std::to_string(m.version));
        const json& img = j.at("img");
        m.img_height = img.at("height").get<int>();
        m.img_width = img.at("width").get<int>();
        m.img_channels = img.at("channels").get<int>();
        m.img_complex = img.at("complex").get<bool>();
        const json& phy = j.at("phy");
        m.phy_height = phy.at("height").get<int>();
        m.phy_width = phy.at("width").get<int>();
        m.n_s = phy.at("n_s").get<int>();
        m.phy_provenance = phy.at("provenance").get<std::string>();
        m.class_names = j.at("class_names").get<std::vector<std::string>>();
        for (const json& r : j.at("records"))
            m.records.push_back({r.at("id").get<std::string>(), r.at("label").get<int>(),
                                 r.at("split").get<std::string>()});
        if (j.at("patch_count").get<std::size_t>() != m.records.size())
            throw std::runtime_error("Img-Phy manifest: patch_count does not match records");
        return m;
    }
};

// On-disk hybrid Image-Physics dataset:
//   manifest.json, splits.json, img/<id>.f32, phy/<id>.u8
// Img rasters are row-major little-endian float32, channel-major, complex
// data interleaved re/im. Phy rasters are uint8 labels, 255 = invalid.
class ImgPhyDataset {
public:
    static ImgPhyDataset create(const std::filesystem::path& root, DatasetManifest manifest) {
        std::filesystem::create_directories(root / "img");
        std::filesystem::create_directories(root / "phy");
        ImgPhyDataset ds;
        ds.root_ = root;
        ds.manifest_ = std::move(manifest);
        ds.write_manifest();
        return ds;
    }

    static ImgPhyDataset open(const std::filesystem::path& root) {
        ImgPhyDataset ds;
        ds.root_ = root;
        std::ifstream in(root / "manifest.json");
        if (!in) throw std::runtime_error("Img-Phy open: missing manifest at " + root.string());
        json j;
        in >> j;
        ds.manifest_ = DatasetManifest::from_json(j);
        std::ifstream sin(root / "splits.json");
        if (sin) {
            json sj;
            sin >> sj;
            for (auto it = sj.begin(); it != sj.end(); ++it)
                ds.splits_[it.key()] = it.value().get<std::vector<std::string>>();
        }
        return ds;
    }

    const DatasetManifest& manifest() const { return manifest_; }
    DatasetManifest& manifest() { return manifest_; }
    const std::filesystem::path& root() const { return root_; }

    const std::map<std::string, std::vector<std::string>>& splits() const { return splits_; }

    void set_splits(std::map<std::string, std::vector<std::string>> splits) {
        splits_ = std::move(splits);
        json j = json::object();
        for (const auto& [name, ids] : splits_) j[name] = ids;
        std::ofstream out(root_ / "splits.json");
        out << j.dump(2) << "\n";
    }

    void write_manifest() const {
        std::ofstream out(root_ / "manifest.json");
        out << manifest_.to_json().dump(2) << "\n";
    }

    std::filesystem::path img_path(const std::string& id) const {
        return root_ / "img" / (id + ".f32");
    }
    std::filesystem::path phy_path(const std::string& id) const {
        return root_ / "phy" / (id + ".u8");
    }

    std::size_t img_floats() const {
        return static_cast<std::size_t>(manifest_.img_height) * manifest_.img_width *
               manifest_.img_channels * (manifest_.img_complex ? 2 : 1);
    }

    void write_img_raw(const std::string& id, const std::vector<float>& data) const {
        if (data.size() != img_floats())
            throw std::runtime_error("Img-Phy write: wrong raster length for patch " + id);
        std::ofstream out(img_path(id), std::ios::binary);
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size() * sizeof(float)));
    }

    std::vector<float> read_img_raw(const std::string& id) const {
        std::ifstream in(img_path(id), std::ios::binary);
        if (!in) throw std::runtime_error("Img-Phy read: missing img file for patch " + id);
        in.seekg(0, std::ios::end);
        std::size_t bytes = static_cast<std::size_t>(in.tellg());
        if (bytes != img_floats() * sizeof(float))
            throw std::runtime_error("Img-Phy read: corrupt img length for patch " + id);
        in.seekg(0);
        std::vector<float> data(img_floats());
        in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
        return data;
    }

    void write_img_scene(const std::string& id, const PolScene& scene) const {
        if (!manifest_.img_complex || scene.channels != manifest_.img_channels ||
            scene.height != manifest_.img_height || scene.width != manifest_.img_width)
            throw std::runtime_error("Img-Phy write: scene dims do not match manifest for " + id);
        std::vector<float> data;
        data.reserve(img_floats());
        for (int c = 0; c < scene.channels; ++c)
            for (const cd& z : scene.images[c].data) {
                data.push_back(static_cast<float>(z.real()));
                data.push_back(static_cast<float>(z.imag()));
            }
        write_img_raw(id, data);
    }

    void write_img_complex(const std::string& id, const ComplexImage& img) const {
        PolScene scene;
        scene.channels = 1;
        scene.height = img.height;
        scene.width = img.width;
        scene.images = {img};
        write_img_scene(id, scene);
    }

    void write_img_amplitude(const std::string& id, const Raster& img) const {
        if (manifest_.img_complex)
            throw std::runtime_error("Img-Phy write: manifest expects complex data for " + id);
        std::vector<float> data;
        data.reserve(img.data.size());
        for (double v : img.data) data.push_back(static_cast<float>(v));
        write_img_raw(id, data);
    }

    PolScene load_scene(const std::string& id) const {
        if (!manifest_.img_complex)
            throw std::runtime_error("Img-Phy read: patch " + id + " holds amplitude data only");
        std::vector<float> data = read_img_raw(id);
        PolScene scene;
        scene.channels = manifest_.img_channels;
        scene.height = manifest_.img_height;
        scene.width = manifest_.img_width;
        const std::size_t plane = static_cast<std::size_t>(scene.height) * scene.width;
        for (int c = 0; c < scene.channels; ++c) {
            ComplexImage img(scene.height, scene.width);
            for (std::size_t p = 0; p < plane; ++p)
                img.data[p] = cd(data[(c * plane + p) * 2], data[(c * plane + p) * 2 + 1]);
            scene.images.push_back(std::move(img));
        }
        return scene;
    }

    // x_I: span amplitude of complex data (optionally multilooked), or the
    // stored raster when the dataset already holds amplitudes.
    Raster load_amplitude(const std::string& id, int multilook_window = 1) const {
        const int h = manifest_.img_height, w = manifest_.img_width;
        Raster amp(h, w);
        if (!manifest_.img_complex) {
            std::vector<float> data = read_img_raw(id);
            for (std::size_t p = 0; p < amp.data.size(); ++p) amp.data[p] = data[p];
            return amp;
        }
        PolScene scene = load_scene(id);
        Raster intensity(h, w);
        for (std::size_t p = 0; p < intensity.data.size(); ++p) {
            double s = 0;
            for (int c = 0; c < scene.channels; ++c) s += std::norm(scene.images[c].data[p]);
            intensity.data[p] = s;
        }
        if (multilook_window <= 1) {
            for (std::size_t p = 0; p < amp.data.size(); ++p)
                amp.data[p] = std::sqrt(intensity.data[p]);
            return amp;
        }
        const int hw = multilook_window / 2;
        for (int r = 0; r < h; ++r) {
            int r0 = std::max(0, r - hw), r1 = std::min(h - 1, r + hw);
            for (int c = 0; c < w; ++c) {
                int c0 = std::max(0, c - hw), c1 = std::min(w - 1, c + hw);
                double s = 0;
                for (int i = r0; i <= r1; ++i)
                    for (int j = c0; j <= c1; ++j) s += intensity.at(i, j);
                amp.at(r, c) = std::sqrt(s / (static_cast<double>(r1 - r0 + 1) * (c1 - c0 + 1)));
            }
        }
        return amp;
    }

    void write_phy(const std::string& id, const ScatteringLabelMap& map) const {
        if (map.height != manifest_.phy_height || map.width != manifest_.phy_width)
            throw std::runtime_error("Img-Phy write: phy dims do not match manifest for " + id);
        std::ofstream out(phy_path(id), std::ios::binary);
        out.write(reinterpret_cast<const char*>(map.labels.data()),
                  static_cast<std::streamsize>(map.labels.size()));
    }

    ScatteringLabelMap read_phy(const std::string& id) const {
        std::ifstream in(phy_path(id), std::ios::binary);
        if (!in) throw std::runtime_error("Img-Phy read: missing phy file for patch " + id);
        in.seekg(0, std::ios::end);
        std::size_t bytes = static_cast<std::size_t>(in.tellg());
        std::size_t want = static_cast<std::size_t>(manifest_.phy_height) * manifest_.phy_width;
        if (bytes != want)
            throw std::runtime_error("Img-Phy read: corrupt phy length for patch " + id);
        in.seekg(0);
        ScatteringLabelMap map(manifest_.phy_height, manifest_.phy_width, manifest_.n_s,
                               manifest_.phy_provenance);
        in.read(reinterpret_cast<char*>(map.labels.data()), static_cast<std::streamsize>(bytes));
        return map;
    }

    bool has_phy(const std::string& id) const {
        return std::filesystem::exists(phy_path(id));
    }

    // every id must have an img file; phy files too once an explainable model
    // has filled them (provenance no longer "pending"). Splits must be
    // disjoint from test and train-k subsets sized correctly.
    void validate() const {
        for (const PatchRecord& r : manifest_.records) {
            if (!std::filesystem::exists(img_path(r.id)))
                throw std::runtime_error("Img-Phy validate: missing img for patch " + r.id);
            if (manifest_.phy_provenance != "pending" && !has_phy(r.id))
                throw std::runtime_error("Img-Phy validate: missing phy for patch " + r.id);
            if (r.label >= static_cast<int>(manifest_.class_names.size()))
                throw std::runtime_error("Img-Phy validate: label out of range for patch " + r.id);
        }
        std::map<std::string, const PatchRecord*> by_id;
        for (const PatchRecord& r : manifest_.records) by_id[r.id] = &r;

        auto test_it = splits_.find("test");
        for (const auto& [name, ids] : splits_) {
            for (const std::string& id : ids)
                if (!by_id.count(id))
                    throw std::runtime_error("Img-Phy validate: split " + name +
                                             " references unknown patch " + id);
            if (name.rfind("train-", 0) == 0 && test_it != splits_.end()) {
                for (const std::string& id : ids)
                    for (const std::string& tid : test_it->second)
                        if (id == tid)
                            throw std::runtime_error("Img-Phy validate: split " + name +
                                                     " overlaps the test split at " + id);
                int k = std::stoi(name.substr(6));
                std::vector<int> per_class(manifest_.class_names.size(), 0);
                for (const std::string& id : ids) {
                    int label = by_id.at(id)->label;
                    if (label < 0)
                        throw std::runtime_error("Img-Phy validate: unlabeled patch " + id +
                                                 " in split " + name);
                    ++per_class[label];
                }
                for (std::size_t c = 0; c < per_class.size(); ++c)
                    if (per_class[c] != k)
                        throw std::runtime_error("Img-Phy validate: split " + name + " has " +
                                                 std::to_string(per_class[c]) + " samples of class " +
                                                 std::to_string(c) + ", expected " +
                                                 std::to_string(k));
            }
        }
    }

    std::vector<std::string> ids_with_split(const std::string& split) const {
        std::vector<std::string> out;
        for (const PatchRecord& r : manifest_.records)
            if (r.split == split) out.push_back(r.id);
        return out;
    }

private:
    std::filesystem::path root_;
    DatasetManifest manifest_;
    std::map<std::string, std::vector<std::string>> splits_;
};

}  // namespace pgil
