#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pgil/rng.hpp"

namespace pgil {

struct KMeansResult {
    std::vector<std::vector<double>> centers;
    std::vector<int> labels;
    double inertia = 0;
    int iterations = 0;
    std::vector<double> inertia_trace;  // recorded after every assignment pass
    bool duplicated_centers = false;
};

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace detail

// Seeded k-means++ initialization followed by Lloyd iterations. Empty clusters
// are reseeded from the points farthest from their assigned centers.
inline KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                           std::uint64_t seed, int max_iter = 100) {
    const std::size_t n = points.size();
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (n < static_cast<std::size_t>(k))
        throw std::invalid_argument("kmeans: fewer points than clusters");
    const std::size_t dim = points[0].size();
    for (const auto& p : points)
        if (p.size() != dim) throw std::invalid_argument("kmeans: ragged points");

    Rng rng(seed);
    KMeansResult res;
    res.centers.reserve(k);

    // k-means++ seeding
    res.centers.push_back(points[rng.uniform_int(n)]);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    for (int c = 1; c < k; ++c) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = detail::sq_dist(points[i], res.centers.back());
            if (d2 < min_d2[i]) min_d2[i] = d2;
            total += min_d2[i];
        }
        std::size_t pick;
        if (total <= 0) {
            pick = rng.uniform_int(n);
        } else {
            double u = rng.uniform() * total, acc = 0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_d2[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        }
        res.centers.push_back(points[pick]);
    }

    res.labels.assign(n, 0);
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);

    for (int iter = 1; iter <= max_iter; ++iter) {
        bool moved = false;
        double inertia = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                double d2 = detail::sq_dist(points[i], res.centers[c]);
                if (d2 < best) {
                    best = d2;
                    best_c = c;
                }
            }
            if (best_c != res.labels[i]) moved = true;
            res.labels[i] = best_c;
            inertia += best;
        }
        res.inertia = inertia;
        res.inertia_trace.push_back(inertia);
        res.iterations = iter;
        if (!moved && iter > 1) break;

        for (int c = 0; c < k; ++c) {
            counts[c] = 0;
            sums[c].assign(dim, 0.0);
        }
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[res.labels[i]];
            for (std::size_t d = 0; d < dim; ++d) sums[res.labels[i]][d] += points[i][d];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t d = 0; d < dim; ++d)
                res.centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
        }
        // reseed empty clusters from the farthest points
        for (int c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            double far_d = -1;
            std::size_t far_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[res.labels[i]] <= 1) continue;
                double d2 = detail::sq_dist(points[i], res.centers[res.labels[i]]);
                if (d2 > far_d) {
                    far_d = d2;
                    far_i = i;
                }
            }
            if (far_d > 0) {
                --counts[res.labels[far_i]];
                res.centers[c] = points[far_i];
                res.labels[far_i] = c;
                counts[c] = 1;
            }
        }
    }

    // flag duplicate centers (fewer distinct inputs than clusters)
    for (int a = 0; a < k && !res.duplicated_centers; ++a)
        for (int b = a + 1; b < k; ++b)
            if (detail::sq_dist(res.centers[a], res.centers[b]) == 0.0) {
                res.duplicated_centers = true;
                break;
            }
    return res;
}

}  // namespace pgil
