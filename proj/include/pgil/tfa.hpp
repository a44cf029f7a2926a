#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "pgil/filter_bank.hpp"
#include "pgil/image.hpp"
#include "pgil/kmeans.hpp"

namespace pgil {

// Time-frequency scattering label map: sub-band patterns on a stride grid,
// L2-normalized and clustered into n_clusters scattering classes.
inline ScatteringLabelMap tfa_label_map(const ComplexImage& image, const FilterBank& bank,
                                        int stride, int segment_size, int n_clusters,
                                        std::uint64_t seed) {
    if (n_clusters < 2) throw std::invalid_argument("tfa_label_map: need >= 2 clusters");
    if (stride < 1) throw std::invalid_argument("tfa_label_map: stride must be >= 1");

    const int gh = (image.height + stride - 1) / stride;
    const int gw = (image.width + stride - 1) / stride;
    if (static_cast<std::size_t>(gh) * gw < static_cast<std::size_t>(n_clusters))
        throw std::invalid_argument("tfa_label_map: fewer grid points than clusters");

    std::vector<std::vector<double>> patterns;
    patterns.reserve(static_cast<std::size_t>(gh) * gw);
    for (int gi = 0; gi < gh; ++gi) {
        for (int gj = 0; gj < gw; ++gj) {
            int r = std::min(image.height - 1, gi * stride + stride / 2);
            int c = std::min(image.width - 1, gj * stride + stride / 2);
            SubbandPattern p = subband_pattern(image, r, c, segment_size, bank);
            double norm = 0;
            for (double v : p.values) norm += v * v;
            norm = std::sqrt(norm);
            if (norm > 0)
                for (double& v : p.values) v /= norm;
            patterns.push_back(std::move(p.values));
        }
    }

    KMeansResult km = kmeans(patterns, n_clusters, seed);

    ScatteringLabelMap map(gh, gw, n_clusters, "tfa");
    for (std::size_t i = 0; i < km.labels.size(); ++i)
        map.labels[i] = static_cast<std::uint8_t>(km.labels[i]);
    return map;
}

}  // namespace pgil
