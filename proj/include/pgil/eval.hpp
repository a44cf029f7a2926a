#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgil/kmeans.hpp"
#include "pgil/rng.hpp"
#include "pgil/tensor.hpp"

namespace pgil {

using FeatureMatrix = std::vector<std::vector<double>>;

// Channel-wise spatial mean of a 4-D feature map, one vector per sample.
inline FeatureMatrix pool_features(const Tensor& fpa) {
    const Shape& s = fpa.shape;
    const std::size_t hw = static_cast<std::size_t>(s.h) * s.w;
    const double inv = 1.0 / static_cast<double>(hw);
    FeatureMatrix out(s.n, std::vector<double>(s.c, 0.0));
    for (int n = 0; n < s.n; ++n)
        for (int c = 0; c < s.c; ++c) {
            const double* p = fpa.data.data() + (static_cast<std::size_t>(n) * s.c + c) * hw;
            double sum = 0;
            for (std::size_t i = 0; i < hw; ++i) sum += p[i];
            out[n][c] = sum * inv;
        }
    return out;
}

// One-vs-rest linear max-margin probe trained by SGD on the hinge loss,
// features standardized by the training set statistics.
struct ProbeModel {
    int n_classes = 0;
    int dim = 0;
    std::vector<std::vector<double>> weights;  // [class][dim]
    std::vector<double> biases;
    std::vector<double> feat_mean, feat_std;

    std::vector<double> decision(const std::vector<double>& x) const {
        std::vector<double> scores(n_classes);
        for (int c = 0; c < n_classes; ++c) {
            double s = biases[c];
            for (int d = 0; d < dim; ++d)
                s += weights[c][d] * (x[d] - feat_mean[d]) / feat_std[d];
            scores[c] = s;
        }
        return scores;
    }

    int predict(const std::vector<double>& x) const {
        std::vector<double> s = decision(x);
        int best = 0;
        for (int c = 1; c < n_classes; ++c)
            if (s[c] > s[best]) best = c;
        return best;
    }

    std::vector<int> predict_all(const FeatureMatrix& xs) const {
        std::vector<int> out(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = predict(xs[i]);
        return out;
    }
};

inline ProbeModel fit_linear_probe(const FeatureMatrix& features, const std::vector<int>& labels,
                                   double reg = 1e-3, int epochs = 60, std::uint64_t seed = 0) {
    if (features.empty() || features.size() != labels.size())
        throw std::invalid_argument("fit_linear_probe: features and labels must pair up");
    int n_classes = 0;
    for (int l : labels) n_classes = std::max(n_classes, l + 1);
    {
        std::vector<std::size_t> support(n_classes, 0);
        for (int l : labels) ++support[l];
        int present = 0;
        for (std::size_t s : support)
            if (s > 0) ++present;
        if (present < 2)
            throw std::invalid_argument("fit_linear_probe: need at least two classes present");
    }

    const int dim = static_cast<int>(features[0].size());
    const std::size_t n = features.size();

    ProbeModel model;
    model.n_classes = n_classes;
    model.dim = dim;
    model.weights.assign(n_classes, std::vector<double>(dim, 0.0));
    model.biases.assign(n_classes, 0.0);
    model.feat_mean.assign(dim, 0.0);
    model.feat_std.assign(dim, 0.0);

    for (const auto& f : features)
        for (int d = 0; d < dim; ++d) model.feat_mean[d] += f[d];
    for (int d = 0; d < dim; ++d) model.feat_mean[d] /= static_cast<double>(n);
    for (const auto& f : features)
        for (int d = 0; d < dim; ++d) {
            double x = f[d] - model.feat_mean[d];
            model.feat_std[d] += x * x;
        }
    for (int d = 0; d < dim; ++d) {
        model.feat_std[d] = std::sqrt(model.feat_std[d] / static_cast<double>(n));
        if (!(model.feat_std[d] > 0)) model.feat_std[d] = 1.0;
    }

    FeatureMatrix z(n, std::vector<double>(dim));
    for (std::size_t i = 0; i < n; ++i)
        for (int d = 0; d < dim; ++d)
            z[i][d] = (features[i][d] - model.feat_mean[d]) / model.feat_std[d];

    Rng rng(seed, 0x5596);
    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);

    std::size_t t = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        Rng shuffle_rng = rng.substream(epoch);
        shuffle_rng.shuffle(order);
        for (int i : order) {
            double lr = 0.5 / (1.0 + 0.02 * static_cast<double>(t++));
            for (int c = 0; c < n_classes; ++c) {
                double y = (labels[i] == c) ? 1.0 : -1.0;
                double margin = model.biases[c];
                for (int d = 0; d < dim; ++d) margin += model.weights[c][d] * z[i][d];
                margin *= y;
                for (int d = 0; d < dim; ++d) {
                    double g = reg * model.weights[c][d];
                    if (margin < 1.0) g -= y * z[i][d];
                    model.weights[c][d] -= lr * g;
                }
                if (margin < 1.0) model.biases[c] += lr * y;
            }
        }
    }
    return model;
}

// Paper-style physics-awareness clustering: k-means on vectors.
inline std::vector<int> kmeans_cluster(const FeatureMatrix& vectors, int k, std::uint64_t seed) {
    return kmeans(vectors, k, seed).labels;
}

// Mean silhouette with Euclidean distances; singleton clusters contribute 0.
inline double silhouette_score(const FeatureMatrix& vectors,
                               const std::vector<int>& cluster_labels) {
    if (vectors.size() != cluster_labels.size() || vectors.empty())
        throw std::invalid_argument("silhouette_score: vectors and labels must pair up");
    int k = 0;
    for (int l : cluster_labels) k = std::max(k, l + 1);
    std::vector<std::size_t> counts(k, 0);
    for (int l : cluster_labels) ++counts[l];
    int non_empty = 0;
    for (std::size_t c : counts)
        if (c > 0) ++non_empty;
    if (non_empty < 2)
        throw std::invalid_argument("silhouette_score: need at least two non-empty clusters");

    const std::size_t n = vectors.size();
    auto dist = [&](std::size_t a, std::size_t b) {
        double s = 0;
        for (std::size_t d = 0; d < vectors[a].size(); ++d) {
            double x = vectors[a][d] - vectors[b][d];
            s += x * x;
        }
        return std::sqrt(s);
    };

    double total = 0;
    std::vector<double> sums(k);
    for (std::size_t i = 0; i < n; ++i) {
        if (counts[cluster_labels[i]] == 1) continue;  // singleton contributes 0
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sums[cluster_labels[j]] += dist(i, j);
        }
        int own = cluster_labels[i];
        double a = sums[own] / static_cast<double>(counts[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || counts[c] == 0) continue;
            b = std::min(b, sums[c] / static_cast<double>(counts[c]));
        }
        total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

struct MetricsReport {
    double overall_accuracy = 0;
    std::vector<double> precision, recall, f1;
    double macro_f1 = 0;
    std::vector<std::vector<std::size_t>> confusion;  // rows = truth
    bool zero_division = false;
};

inline MetricsReport classification_report(const std::vector<int>& pred,
                                           const std::vector<int>& truth) {
    if (pred.empty() || pred.size() != truth.size())
        throw std::invalid_argument("classification_report: predictions and truth must pair up");
    int k = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) k = std::max({k, pred[i] + 1, truth[i] + 1});

    MetricsReport rep;
    rep.confusion.assign(k, std::vector<std::size_t>(k, 0));
    for (std::size_t i = 0; i < pred.size(); ++i) ++rep.confusion[truth[i]][pred[i]];

    std::size_t trace = 0;
    for (int c = 0; c < k; ++c) trace += rep.confusion[c][c];
    rep.overall_accuracy = static_cast<double>(trace) / static_cast<double>(pred.size());

    rep.precision.assign(k, 0.0);
    rep.recall.assign(k, 0.0);
    rep.f1.assign(k, 0.0);
    for (int c = 0; c < k; ++c) {
        std::size_t tp = rep.confusion[c][c], fp = 0, fn = 0;
        for (int o = 0; o < k; ++o) {
            if (o == c) continue;
            fp += rep.confusion[o][c];
            fn += rep.confusion[c][o];
        }
        if (tp + fp > 0)
            rep.precision[c] = static_cast<double>(tp) / static_cast<double>(tp + fp);
        else
            rep.zero_division = true;
        if (tp + fn > 0)
            rep.recall[c] = static_cast<double>(tp) / static_cast<double>(tp + fn);
        else
            rep.zero_division = true;
        if (rep.precision[c] + rep.recall[c] > 0)
            rep.f1[c] = 2.0 * rep.precision[c] * rep.recall[c] / (rep.precision[c] + rep.recall[c]);
        else
            rep.zero_division = true;
        rep.macro_f1 += rep.f1[c];
    }
    rep.macro_f1 /= static_cast<double>(k);
    return rep;
}

}  // namespace pgil
