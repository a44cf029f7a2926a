#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pgil/complex_mat.hpp"
#include "pgil/image.hpp"
#include "pgil/sar_synth.hpp"

namespace pgil {

struct HAlpha {
    double entropy = 0;    // [0, 1], log base = matrix dim
    double alpha_deg = 0;  // [0, 90]
    bool no_signal = false;
};

// Eigenvalue entropy and mean alpha angle of a Hermitian PSD coherency matrix.
inline HAlpha h_alpha_decompose(const CMat& t) {
    HAlpha out;
    EigenSystem es = eigen_hermitian(t);
    const int d = t.dim;

    double total = 0;
    std::array<double, 3> lam{};
    for (int i = 0; i < d; ++i) {
        lam[i] = std::max(0.0, es.values[i]);
        total += lam[i];
    }
    if (total <= 0.0) {
        out.no_signal = true;
        return out;
    }

    const double log_base = std::log(static_cast<double>(d));
    double h = 0, alpha = 0;
    for (int i = 0; i < d; ++i) {
        double p = lam[i] / total;
        if (p > 0) h -= p * std::log(p) / log_base;
        double c = std::min(1.0, std::abs(es.vectors[i][0]));
        alpha += p * std::acos(c) * (180.0 / 3.14159265358979323846);
    }
    out.entropy = std::max(0.0, h);
    out.alpha_deg = alpha;
    return out;
}

// Nine-zone partition of the H/alpha plane. Breaks: H at {0.5, 0.9}; alpha at
// {42.5, 47.5} (low H), {40, 50} (mid H), {40, 55} (high H). Band membership
// is inclusive on the lower edge. Zone ids follow the usual numbering, Z1 =
// high-entropy multiple scattering down to Z9 = low-entropy surface.
inline int h_alpha_zone(double entropy, double alpha_deg) {
    double h = std::min(1.0, std::max(0.0, entropy));
    double a = std::min(90.0, std::max(0.0, alpha_deg));

    int h_band = (h >= 0.9) ? 2 : (h >= 0.5) ? 1 : 0;
    static constexpr double breaks[3][2] = {{42.5, 47.5}, {40.0, 50.0}, {40.0, 55.0}};
    int a_band = (a >= breaks[h_band][1]) ? 2 : (a >= breaks[h_band][0]) ? 1 : 0;

    return 1 + 3 * (2 - h_band) + (2 - a_band);
}

inline const char* h_alpha_zone_name(int zone) {
    static constexpr const char* names[9] = {
        "high-entropy multiple scattering", "high-entropy vegetation", "high-entropy surface",
        "mid-entropy multiple scattering",  "mid-entropy vegetation",  "mid-entropy surface",
        "low-entropy multiple scattering",  "low-entropy dipole",      "low-entropy surface"};
    if (zone < 1 || zone > 9) throw std::invalid_argument("zone id must be 1..9");
    return names[zone - 1];
}

// Per-pixel H/alpha rasters.
struct HAlphaResult {
    Raster entropy;
    Raster alpha_deg;
    std::vector<std::uint8_t> no_signal;
};

inline HAlphaResult h_alpha_field(const CoherencyField& field) {
    HAlphaResult out;
    out.entropy = Raster(field.height, field.width);
    out.alpha_deg = Raster(field.height, field.width);
    out.no_signal.assign(field.t.size(), 0);
    for (std::size_t p = 0; p < field.t.size(); ++p) {
        HAlpha ha = h_alpha_decompose(field.t[p]);
        out.entropy.data[p] = ha.entropy;
        out.alpha_deg.data[p] = ha.alpha_deg;
        out.no_signal[p] = ha.no_signal ? 1 : 0;
    }
    return out;
}

// Zone labels 0..8 (zone id minus one) for seeding the Wishart refinement.
inline ScatteringLabelMap h_alpha_zone_map(const CoherencyField& field) {
    ScatteringLabelMap map(field.height, field.width, 9, "h-alpha");
    for (std::size_t p = 0; p < field.t.size(); ++p) {
        HAlpha ha = h_alpha_decompose(field.t[p]);
        map.labels[p] = static_cast<std::uint8_t>(h_alpha_zone(ha.entropy, ha.alpha_deg) - 1);
    }
    return map;
}

}  // namespace pgil
