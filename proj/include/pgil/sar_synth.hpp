#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgil/complex_mat.hpp"
#include "pgil/filter_bank.hpp"
#include "pgil/image.hpp"
#include "pgil/rng.hpp"

namespace pgil {

// A named Hermitian PSD coherency matrix that generates speckle.
struct CoherencySpec {
    int dim = 3;
    CMat matrix;
    std::string name;

    void validate() const {
        if (dim < 1 || dim > 3 || matrix.dim != dim)
            throw std::invalid_argument("CoherencySpec '" + name + "': dim must be 1..3");
        double defect = matrix.max_hermitian_defect();
        if (defect > 1e-12)
            throw std::invalid_argument("CoherencySpec '" + name + "': not Hermitian (defect " +
                                        std::to_string(defect) + ")");
        EigenSystem es = eigen_hermitian(matrix);
        for (int i = 0; i < dim; ++i)
            if (es.values[i] < -1e-12)
                throw std::invalid_argument("CoherencySpec '" + name + "': not PSD (eigenvalue " +
                                            std::to_string(es.values[i]) + ")");
    }
};

// Canonical unit-trace presets matching the usual scattering-zone semantics.
inline CoherencySpec surface_spec() {
    CoherencySpec s;
    s.dim = 3;
    s.matrix = CMat::diag({0.95, 0.04, 0.01});
    s.name = "surface";
    return s;
}

inline CoherencySpec double_bounce_spec() {
    CoherencySpec s;
    s.dim = 3;
    s.matrix = CMat::diag({0.04, 0.95, 0.01});
    s.name = "double-bounce";
    return s;
}

// Dominant scatterer tilted midway between the first two components, so the
// mean angle lands in the mid band with moderate entropy.
inline CoherencySpec volume_spec() {
    CoherencySpec s;
    s.dim = 3;
    s.matrix = CMat(3);
    const double r = 0.70710678118654752440;
    CVec v1{r, r, 0.0}, v2{r, -r, 0.0}, v3{0.0, 0.0, 1.0};
    s.matrix += 0.80 * outer(v1, 3);
    s.matrix += 0.15 * outer(v2, 3);
    s.matrix += 0.05 * outer(v3, 3);
    s.name = "volume";
    return s;
}

struct PointTarget {
    int row = 0, col = 0;
    double amplitude = 1.0;
    int sig_rows = 0, sig_cols = 0;       // must match the synthesis filter bank grid
    std::vector<cd> gains;                // row-major per-sub-band complex gains
};

struct MixtureComponent {
    int spec = 0;      // index into SceneLayout::specs
    double weight = 0;
};

struct ClassSpec {
    std::string name;
    std::vector<MixtureComponent> mixture;  // polarimetric generation
    double background_power = 0.0;          // single-channel generation
    std::vector<PointTarget> targets;
};

struct Region {
    int row = 0, col = 0, height = 0, width = 0;
    int class_id = 0;
};

struct SceneLayout {
    int height = 0, width = 0;
    std::vector<CoherencySpec> specs;
    std::vector<ClassSpec> classes;
    std::vector<Region> regions;

    void validate() const {
        if (height < 1 || width < 1) throw std::invalid_argument("SceneLayout: empty raster");
        if (regions.empty()) throw std::invalid_argument("SceneLayout: no regions");
        for (const CoherencySpec& s : specs) s.validate();
        std::vector<std::uint8_t> cover(static_cast<std::size_t>(height) * width, 0);
        for (const Region& r : regions) {
            if (r.class_id < 0 || r.class_id >= static_cast<int>(classes.size()))
                throw std::invalid_argument("SceneLayout: region class out of range");
            if (r.row < 0 || r.col < 0 || r.height < 1 || r.width < 1 ||
                r.row + r.height > height || r.col + r.width > width)
                throw std::invalid_argument("SceneLayout: region outside raster");
            for (int i = r.row; i < r.row + r.height; ++i)
                for (int j = r.col; j < r.col + r.width; ++j)
                    ++cover[static_cast<std::size_t>(i) * width + j];
        }
        for (std::uint8_t c : cover)
            if (c != 1) throw std::invalid_argument("SceneLayout: regions must tile the raster");
        for (const ClassSpec& cls : classes) {
            if (cls.mixture.empty()) continue;
            double sum = 0;
            for (const MixtureComponent& m : cls.mixture) {
                if (m.spec < 0 || m.spec >= static_cast<int>(specs.size()))
                    throw std::invalid_argument("SceneLayout: mixture spec index out of range");
                if (m.weight < 0) throw std::invalid_argument("SceneLayout: negative weight");
                sum += m.weight;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("SceneLayout: class '" + cls.name +
                                            "' mixture weights sum to " + std::to_string(sum));
        }
    }
};

// Multi-channel speckle raster with per-pixel generation ground truth.
struct PolScene {
    int channels = 0, height = 0, width = 0;
    std::vector<ComplexImage> images;      // one per channel
    std::vector<std::uint8_t> truth;       // semantic class id per pixel
    std::vector<std::uint8_t> mechanism;   // generating coherency spec id per pixel
};

// One draw of the zero-mean circular complex Gaussian whose expected outer
// product is spec.matrix.
inline CVec sample_scattering_vector(const CoherencySpec& spec, Rng& rng) {
    spec.validate();
    CMat root = hermitian_sqrt(spec.matrix);
    const double inv_sqrt2 = 0.70710678118654752440;
    CVec z{};
    for (int i = 0; i < spec.dim; ++i)
        z[i] = cd(rng.gaussian(), rng.gaussian()) * inv_sqrt2;
    CVec k{};
    for (int r = 0; r < spec.dim; ++r) {
        cd acc = 0.0;
        for (int c = 0; c < spec.dim; ++c) acc += root.at(r, c) * z[c];
        k[r] = acc;
    }
    return k;
}

namespace detail {

// Validated square roots cached per spec for full-scene generation.
struct SpecSamplers {
    int dim = 0;
    std::vector<CMat> roots;

    explicit SpecSamplers(const std::vector<CoherencySpec>& specs) {
        if (specs.empty()) throw std::invalid_argument("scene generation: no coherency specs");
        dim = specs[0].dim;
        for (const CoherencySpec& s : specs) {
            s.validate();
            if (s.dim != dim)
                throw std::invalid_argument("scene generation: mixed coherency dims");
            roots.push_back(hermitian_sqrt(s.matrix));
        }
    }

    CVec sample(int spec_idx, Rng& rng) const {
        const CMat& root = roots[spec_idx];
        const double inv_sqrt2 = 0.70710678118654752440;
        CVec z{};
        for (int i = 0; i < dim; ++i) z[i] = cd(rng.gaussian(), rng.gaussian()) * inv_sqrt2;
        CVec k{};
        for (int r = 0; r < dim; ++r) {
            cd acc = 0.0;
            for (int c = 0; c < dim; ++c) acc += root.at(r, c) * z[c];
            k[r] = acc;
        }
        return k;
    }
};

inline std::vector<std::uint8_t> region_class_raster(const SceneLayout& layout) {
    std::vector<std::uint8_t> cls(static_cast<std::size_t>(layout.height) * layout.width, 0);
    for (const Region& r : layout.regions)
        for (int i = r.row; i < r.row + r.height; ++i)
            for (int j = r.col; j < r.col + r.width; ++j)
                cls[static_cast<std::size_t>(i) * layout.width + j] =
                    static_cast<std::uint8_t>(r.class_id);
    return cls;
}

}  // namespace detail

// Each pixel draws its scattering vector from the class mixture through an
// independent counter-derived substream, so generation order never matters.
inline PolScene generate_polsar_scene(const SceneLayout& layout, std::uint64_t seed) {
    layout.validate();
    detail::SpecSamplers samplers(layout.specs);
    std::vector<std::uint8_t> cls = detail::region_class_raster(layout);

    PolScene scene;
    scene.channels = samplers.dim;
    scene.height = layout.height;
    scene.width = layout.width;
    scene.images.assign(scene.channels, ComplexImage(scene.height, scene.width));
    scene.truth = cls;
    scene.mechanism.assign(cls.size(), 0);

    Rng base(seed);
    const std::size_t n_pix = cls.size();
    for (std::size_t p = 0; p < n_pix; ++p) {
        const ClassSpec& spec = layout.classes[cls[p]];
        if (spec.mixture.empty())
            throw std::invalid_argument("generate_polsar_scene: class '" + spec.name +
                                        "' has no coherency mixture");
        Rng pix = base.substream(p);
        int chosen = spec.mixture.back().spec;
        double u = pix.uniform(), acc = 0;
        for (const MixtureComponent& m : spec.mixture) {
            acc += m.weight;
            if (u < acc) {
                chosen = m.spec;
                break;
            }
        }
        scene.mechanism[p] = static_cast<std::uint8_t>(chosen);
        CVec k = samplers.sample(chosen, pix);
        for (int c = 0; c < scene.channels; ++c) scene.images[c].data[p] = k[c];
    }
    return scene;
}

// Single-channel scene: complex Gaussian background plus point targets whose
// spectra are shaped on the given filter bank by their sub-band signatures.
inline ComplexImage generate_slc_scene(const SceneLayout& layout, const FilterBank& bank,
                                       std::uint64_t seed) {
    layout.validate();
    std::vector<std::uint8_t> cls = detail::region_class_raster(layout);

    const int h = layout.height, w = layout.width;
    ComplexImage img(h, w);

    Rng base(seed);
    const double inv_sqrt2 = 0.70710678118654752440;
    for (std::size_t p = 0; p < cls.size(); ++p) {
        double power = layout.classes[cls[p]].background_power;
        if (power <= 0.0) continue;
        Rng pix = base.substream(p);
        img.data[p] = cd(pix.gaussian(), pix.gaussian()) * (std::sqrt(power) * inv_sqrt2);
    }

    bool any_target = false;
    std::vector<cd> spectrum(static_cast<std::size_t>(h) * w, cd(0.0));
    for (const ClassSpec& spec : layout.classes) {
        for (const PointTarget& t : spec.targets) {
            if (t.sig_rows != bank.n_r || t.sig_cols != bank.n_a ||
                t.gains.size() != static_cast<std::size_t>(bank.size()))
                throw std::invalid_argument(
                    "generate_slc_scene: target signature grid does not match the filter bank");
            any_target = true;
            for (int k = 0; k < h; ++k) {
                double f_r = wrap_frequency(static_cast<double>(k) / h);
                for (int l = 0; l < w; ++l) {
                    double f_a = wrap_frequency(static_cast<double>(l) / w);
                    cd gain = 0.0;
                    for (int ir = 0; ir < bank.n_r; ++ir) {
                        double wr = bank.axis_weight(f_r, bank.centers_r[ir]);
                        if (wr == 0.0) continue;
                        for (int ia = 0; ia < bank.n_a; ++ia) {
                            double wa = bank.axis_weight(f_a, bank.centers_a[ia]);
                            if (wa == 0.0) continue;
                            gain += t.gains[static_cast<std::size_t>(ir) * bank.n_a + ia] *
                                    (wr * wa);
                        }
                    }
                    if (gain == cd(0.0)) continue;
                    double ang = -6.283185307179586 *
                                 (static_cast<double>(k) * t.row / h +
                                  static_cast<double>(l) * t.col / w);
                    spectrum[static_cast<std::size_t>(k) * w + l] +=
                        t.amplitude * gain * cd(std::cos(ang), std::sin(ang));
                }
            }
        }
    }
    if (any_target) {
        fft_2d(spectrum, h, w, true);
        for (std::size_t p = 0; p < img.data.size(); ++p) img.data[p] += spectrum[p];
    }
    return img;
}

// Per-pixel multilook coherency estimates.
struct CoherencyField {
    int height = 0, width = 0, dim = 0;
    std::vector<CMat> t;

    CMat& at(int r, int c) { return t[static_cast<std::size_t>(r) * width + c]; }
    const CMat& at(int r, int c) const { return t[static_cast<std::size_t>(r) * width + c]; }
};

// Boxcar mean of k k^H over a clamped (border-shrinking) window. Only the
// upper triangle is accumulated and the lower is mirrored, so the output is
// Hermitian bit-exactly.
inline CoherencyField estimate_coherency(const PolScene& scene, int window) {
    if (window < 1 || window % 2 == 0)
        throw std::invalid_argument("estimate_coherency: window must be odd and >= 1");
    if (window > scene.height || window > scene.width)
        throw std::invalid_argument("estimate_coherency: window larger than raster");

    const int h = scene.height, w = scene.width, d = scene.channels, hw = window / 2;

    CoherencyField field;
    field.height = h;
    field.width = w;
    field.dim = d;
    field.t.assign(static_cast<std::size_t>(h) * w, CMat(d));

    for (int r = 0; r < h; ++r) {
        int r0 = std::max(0, r - hw), r1 = std::min(h - 1, r + hw);
        for (int c = 0; c < w; ++c) {
            int c0 = std::max(0, c - hw), c1 = std::min(w - 1, c + hw);
            CMat& m = field.at(r, c);
            for (int i = r0; i <= r1; ++i) {
                for (int j = c0; j <= c1; ++j) {
                    std::size_t p = static_cast<std::size_t>(i) * w + j;
                    for (int a = 0; a < d; ++a) {
                        cd ka = scene.images[a].data[p];
                        m.at(a, a) += std::norm(ka);
                        for (int b = a + 1; b < d; ++b)
                            m.at(a, b) += ka * std::conj(scene.images[b].data[p]);
                    }
                }
            }
            double inv_n = 1.0 / (static_cast<double>(r1 - r0 + 1) * (c1 - c0 + 1));
            for (int a = 0; a < d; ++a)
                for (int b = a; b < d; ++b) m.at(a, b) *= inv_n;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < a; ++b) m.at(a, b) = std::conj(m.at(b, a));
        }
    }
    return field;
}

}  // namespace pgil
