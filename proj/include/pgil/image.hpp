#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgil {

using cd = std::complex<double>;

// Single-channel complex raster, row-major.
struct ComplexImage {
    int height = 0;
    int width = 0;
    std::vector<cd> data;

    ComplexImage() = default;
    ComplexImage(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w) {}

    cd& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
    const cd& at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
    std::size_t size() const { return data.size(); }

    void validate() const {
        if (data.size() != static_cast<std::size_t>(height) * width)
            throw std::invalid_argument("ComplexImage: data length does not match height*width");
        for (const cd& z : data)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw std::invalid_argument("ComplexImage: non-finite sample");
    }
};

// Real-valued raster (amplitude patches, feature planes).
struct Raster {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Raster() = default;
    Raster(int h, int w, double fill = 0.0)
        : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
};

constexpr std::uint8_t kInvalidLabel = 255;

// Per-pixel discrete scattering labels produced by an explainable model.
struct ScatteringLabelMap {
    int height = 0;
    int width = 0;
    int n_classes = 0;
    std::string provenance;
    std::vector<std::uint8_t> labels;

    ScatteringLabelMap() = default;
    ScatteringLabelMap(int h, int w, int n, std::string prov = "")
        : height(h), width(w), n_classes(n), provenance(std::move(prov)),
          labels(static_cast<std::size_t>(h) * w, 0) {}

    std::uint8_t& at(int r, int c) { return labels[static_cast<std::size_t>(r) * width + c]; }
    std::uint8_t at(int r, int c) const { return labels[static_cast<std::size_t>(r) * width + c]; }

    void validate() const {
        if (labels.size() != static_cast<std::size_t>(height) * width)
            throw std::invalid_argument("ScatteringLabelMap: label raster does not match dims");
        for (std::uint8_t v : labels)
            if (v != kInvalidLabel && v >= n_classes)
                throw std::invalid_argument("ScatteringLabelMap: label >= class count");
    }
};

}  // namespace pgil
