#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pgil/complex_mat.hpp"
#include "pgil/image.hpp"
#include "pgil/sar_synth.hpp"

namespace pgil {

// Per-class Wishart centers with occupancy bookkeeping.
struct WishartCenters {
    int dim = 0;
    std::vector<CMat> sigma;
    std::vector<std::size_t> counts;
    std::vector<bool> active;
};

namespace detail {

// ln|Sigma| and Sigma^-1 with ridge regularization of singular centers.
struct PreparedCenter {
    CMat inv;
    double log_det = 0;
    bool regularized = false;
};

inline PreparedCenter prepare_center(const CMat& sigma) {
    PreparedCenter out;
    CMat s = sigma;
    double det = determinant(s).real();
    if (!(det > 0) || !std::isfinite(det)) {
        double eps = 1e-6 * s.trace_real() / s.dim;
        if (!(eps > 0)) eps = 1e-12;
        for (int i = 0; i < s.dim; ++i) s.at(i, i) += eps;
        det = determinant(s).real();
        out.regularized = true;
        if (!(det > 0))
            throw std::invalid_argument("wishart_distance: center not positive definite");
    }
    out.inv = inverse(s);
    out.log_det = std::log(det);
    return out;
}

inline double distance_to(const PreparedCenter& c, const CMat& t) {
    double tr = 0;
    for (int i = 0; i < t.dim; ++i)
        for (int j = 0; j < t.dim; ++j) tr += (c.inv.at(i, j) * t.at(j, i)).real();
    return c.log_det + tr;
}

}  // namespace detail

// Wishart log-likelihood distance d = ln|Sigma| + tr(Sigma^-1 T).
inline double wishart_distance(const CMat& t, const CMat& sigma, bool* regularized = nullptr) {
    detail::PreparedCenter c = detail::prepare_center(sigma);
    if (regularized) *regularized = c.regularized;
    return detail::distance_to(c, t);
}

struct WishartResult {
    ScatteringLabelMap labels;
    WishartCenters centers;
    std::vector<std::size_t> changed_per_iter;
    int iterations = 0;
    bool degenerate = false;
};

// Iterative refinement: re-estimate class means from the current labels, then
// reassign every pixel to the nearest center. Classes that lose all members
// stay frozen at their previous center and stop receiving pixels.
inline WishartResult wishart_classify(const CoherencyField& field,
                                      const ScatteringLabelMap& init, int max_iter = 10,
                                      double min_changed_fraction = 1e-3) {
    if (init.height != field.height || init.width != field.width)
        throw std::invalid_argument("wishart_classify: init map does not match field dims");
    if (max_iter < 1) throw std::invalid_argument("wishart_classify: max_iter must be >= 1");

    const int n_classes = init.n_classes;
    const std::size_t n_pix = field.t.size();

    WishartResult res;
    res.labels = init;
    res.labels.provenance = "h-alpha-wishart";
    res.centers.dim = field.dim;
    res.centers.sigma.assign(n_classes, CMat(field.dim));
    res.centers.counts.assign(n_classes, 0);
    res.centers.active.assign(n_classes, false);

    std::vector<detail::PreparedCenter> prepared(n_classes);

    for (int iter = 1; iter <= max_iter; ++iter) {
        // class means over current assignment
        std::vector<CMat> sums(n_classes, CMat(field.dim));
        std::vector<std::size_t> counts(n_classes, 0);
        for (std::size_t p = 0; p < n_pix; ++p) {
            std::uint8_t m = res.labels.labels[p];
            if (m == kInvalidLabel) continue;
            sums[m] += field.t[p];
            ++counts[m];
        }
        for (int m = 0; m < n_classes; ++m) {
            if (counts[m] > 0) {
                sums[m] *= 1.0 / static_cast<double>(counts[m]);
                res.centers.sigma[m] = sums[m];
                res.centers.active[m] = true;
            } else {
                res.centers.active[m] = res.centers.counts[m] > 0 && res.centers.active[m];
            }
            res.centers.counts[m] = counts[m];
            if (res.centers.active[m]) prepared[m] = detail::prepare_center(res.centers.sigma[m]);
        }

        // reassignment
        std::size_t changed = 0;
        for (std::size_t p = 0; p < n_pix; ++p) {
            if (res.labels.labels[p] == kInvalidLabel) continue;
            double best = std::numeric_limits<double>::infinity();
            int best_m = res.labels.labels[p];
            for (int m = 0; m < n_classes; ++m) {
                if (!res.centers.active[m]) continue;
                double d = detail::distance_to(prepared[m], field.t[p]);
                if (d < best) {
                    best = d;
                    best_m = m;
                }
            }
            if (best_m != res.labels.labels[p]) {
                res.labels.labels[p] = static_cast<std::uint8_t>(best_m);
                ++changed;
            }
        }
        res.changed_per_iter.push_back(changed);
        res.iterations = iter;

        if (iter == 1) {
            std::vector<std::size_t> occ(n_classes, 0);
            for (std::size_t p = 0; p < n_pix; ++p)
                if (res.labels.labels[p] != kInvalidLabel) ++occ[res.labels.labels[p]];
            int occupied = 0;
            for (int m = 0; m < n_classes; ++m)
                if (occ[m] > 0) ++occupied;
            if (occupied <= 1) res.degenerate = true;
        }

        if (static_cast<double>(changed) / static_cast<double>(n_pix) < min_changed_fraction)
            break;
    }
    return res;
}

}  // namespace pgil
