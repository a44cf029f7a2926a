#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pgil/image.hpp"
#include "pgil/kmeans.hpp"
#include "pgil/rng.hpp"

namespace pgil {

// Normalized label histogram of one crop; length = N_s, sums to 1.
using WordVector = std::vector<double>;

// Word frequencies of one patch; length = N_v.
using Document = std::vector<int>;

// Topic mixture phi_1..phi_K; non-negative, sums to 1.
using BoTVector = std::vector<double>;

inline WordVector label_histogram(const ScatteringLabelMap& map, int r0, int c0, int crop) {
    WordVector h(static_cast<std::size_t>(map.n_classes), 0.0);
    int valid = 0;
    for (int r = r0; r < r0 + crop; ++r) {
        for (int c = c0; c < c0 + crop; ++c) {
            std::uint8_t v = map.at(r, c);
            if (v == kInvalidLabel) continue;
            h[v] += 1.0;
            ++valid;
        }
    }
    if (valid == 0) {
        double u = 1.0 / static_cast<double>(map.n_classes);
        for (double& x : h) x = u;
        return h;
    }
    for (double& x : h) x /= static_cast<double>(valid);
    return h;
}

// Uniformly positioned random crops reduced to normalized histograms.
inline std::vector<WordVector> extract_word_vectors(const ScatteringLabelMap& map, int crop,
                                                    int count, Rng& rng) {
    if (map.height < crop || map.width < crop)
        throw std::invalid_argument("extract_word_vectors: map smaller than crop");
    std::vector<WordVector> words;
    words.reserve(count);
    for (int i = 0; i < count; ++i) {
        int r0 = static_cast<int>(rng.uniform_int(map.height - crop + 1));
        int c0 = static_cast<int>(rng.uniform_int(map.width - crop + 1));
        words.push_back(label_histogram(map, r0, c0, crop));
    }
    return words;
}

// k-means cluster centers over word vectors; assignment is nearest center by
// Euclidean distance, ties resolved to the lowest index.
struct Vocabulary {
    int n_s = 0;
    std::vector<std::vector<double>> centers;
    bool duplicated_centers = false;

    int size() const { return static_cast<int>(centers.size()); }

    int assign(const WordVector& w) const {
        double best = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (int c = 0; c < size(); ++c) {
            double d = 0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                double x = w[i] - centers[c][i];
                d += x * x;
            }
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        return best_c;
    }
};

inline Vocabulary build_vocabulary(const std::vector<WordVector>& words, int n_v,
                                   std::uint64_t seed, int max_iter = 100) {
    if (words.size() < static_cast<std::size_t>(n_v))
        throw std::invalid_argument("build_vocabulary: fewer words than vocabulary size");
    KMeansResult km = kmeans(words, n_v, seed, max_iter);
    Vocabulary v;
    v.n_s = static_cast<int>(words[0].size());
    v.centers = std::move(km.centers);
    v.duplicated_centers = km.duplicated_centers;
    return v;
}

inline KMeansResult vocabulary_kmeans_trace(const std::vector<WordVector>& words, int n_v,
                                            std::uint64_t seed, int max_iter = 100) {
    return kmeans(words, n_v, seed, max_iter);
}

// Tile the label map with the given step and count vocabulary assignments.
inline Document encode_document(const ScatteringLabelMap& map, const Vocabulary& vocab,
                                int crop = 8, int step = 4) {
    if (map.height < crop || map.width < crop)
        throw std::invalid_argument("encode_document: map smaller than crop");
    Document doc(static_cast<std::size_t>(vocab.size()), 0);
    for (int r0 = 0; r0 + crop <= map.height; r0 += step)
        for (int c0 = 0; c0 + crop <= map.width; c0 += step)
            ++doc[vocab.assign(label_histogram(map, r0, c0, crop))];
    return doc;
}

struct Corpus {
    int n_words = 0;                 // N_v
    std::vector<Document> docs;      // N_d documents
};

struct LdaModel {
    int n_topics = 0;                // K
    int n_words = 0;                 // N_v
    std::vector<double> topic_word;  // K x N_v, rows on the simplex
    double alpha = 0;                // Dirichlet prior on doc-topic
    double beta = 0;                 // Dirichlet prior on topic-word
    int trained_iterations = 0;
    std::uint64_t seed = 0;

    double phi(int k, int w) const { return topic_word[static_cast<std::size_t>(k) * n_words + w]; }
};

// Collapsed Gibbs sampling over token-topic assignments; the topic-word matrix
// is read off the final count state with beta smoothing.
inline LdaModel train_lda(const Corpus& corpus, int n_topics, double alpha, double beta,
                          int iters, std::uint64_t seed) {
    if (n_topics < 2) throw std::invalid_argument("train_lda: K must be >= 2");
    if (corpus.docs.empty()) throw std::invalid_argument("train_lda: empty corpus");
    const int V = corpus.n_words;
    const int K = n_topics;

    // token stream: (doc, word) expanded from counts in deterministic order
    std::vector<int> tok_doc, tok_word;
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
        if (corpus.docs[d].size() != static_cast<std::size_t>(V))
            throw std::invalid_argument("train_lda: document width != corpus n_words");
        for (int w = 0; w < V; ++w)
            for (int c = 0; c < corpus.docs[d][w]; ++c) {
                tok_doc.push_back(static_cast<int>(d));
                tok_word.push_back(w);
            }
    }
    const std::size_t n_tokens = tok_doc.size();
    if (n_tokens == 0) throw std::invalid_argument("train_lda: corpus has no tokens");

    Rng rng(seed);
    std::vector<int> z(n_tokens);
    std::vector<int> n_dk(corpus.docs.size() * K, 0);
    std::vector<int> n_kw(static_cast<std::size_t>(K) * V, 0);
    std::vector<int> n_k(K, 0);
    for (std::size_t t = 0; t < n_tokens; ++t) {
        int k = static_cast<int>(rng.uniform_int(K));
        z[t] = k;
        ++n_dk[static_cast<std::size_t>(tok_doc[t]) * K + k];
        ++n_kw[static_cast<std::size_t>(k) * V + tok_word[t]];
        ++n_k[k];
    }

    const double v_beta = V * beta;
    std::vector<double> p(K);
    for (int sweep = 0; sweep < iters; ++sweep) {
        for (std::size_t t = 0; t < n_tokens; ++t) {
            const int d = tok_doc[t], w = tok_word[t], old_k = z[t];
            int* dk = &n_dk[static_cast<std::size_t>(d) * K];
            --dk[old_k];
            --n_kw[static_cast<std::size_t>(old_k) * V + w];
            --n_k[old_k];

            double total = 0;
            for (int k = 0; k < K; ++k) {
                total += (n_kw[static_cast<std::size_t>(k) * V + w] + beta) /
                         (n_k[k] + v_beta) * (dk[k] + alpha);
                p[k] = total;
            }
            double u = rng.uniform() * total;
            int new_k = K - 1;
            for (int k = 0; k < K; ++k)
                if (u < p[k]) {
                    new_k = k;
                    break;
                }

            z[t] = new_k;
            ++dk[new_k];
            ++n_kw[static_cast<std::size_t>(new_k) * V + w];
            ++n_k[new_k];
        }

        if (sweep % 10 == 9) {
            long long sum_k = 0;
            for (int k = 0; k < K; ++k) sum_k += n_k[k];
            if (sum_k != static_cast<long long>(n_tokens))
                throw std::logic_error("train_lda: topic count table out of sync");
        }
    }

    LdaModel model;
    model.n_topics = K;
    model.n_words = V;
    model.alpha = alpha;
    model.beta = beta;
    model.trained_iterations = iters;
    model.seed = seed;
    model.topic_word.resize(static_cast<std::size_t>(K) * V);
    for (int k = 0; k < K; ++k) {
        double row = 0;
        for (int w = 0; w < V; ++w) {
            double v = (n_kw[static_cast<std::size_t>(k) * V + w] + beta);
            model.topic_word[static_cast<std::size_t>(k) * V + w] = v;
            row += v;
        }
        for (int w = 0; w < V; ++w) model.topic_word[static_cast<std::size_t>(k) * V + w] /= row;
    }
    return model;
}

// Gibbs inference against the frozen topic-word matrix; phi is the average of
// post-burn-in topic proportions, normalized to sum exactly 1. The sample
// average is the only smoothing: topics never visited stay at exact zero,
// which is what makes the sparsity diagnostic meaningful.
inline BoTVector infer_bot(const Document& doc, const LdaModel& model, int burn_in, int samples,
                           std::uint64_t seed, bool* empty_doc_warning = nullptr) {
    if (doc.size() != static_cast<std::size_t>(model.n_words))
        throw std::invalid_argument("infer_bot: document width != model n_words");
    if (samples < 1) throw std::invalid_argument("infer_bot: need >= 1 averaged samples");
    const int K = model.n_topics;

    std::vector<int> tok_word;
    for (int w = 0; w < model.n_words; ++w)
        for (int c = 0; c < doc[w]; ++c) tok_word.push_back(w);

    if (tok_word.empty()) {
        if (empty_doc_warning) *empty_doc_warning = true;
        return BoTVector(static_cast<std::size_t>(K), 1.0 / K);
    }
    if (empty_doc_warning) *empty_doc_warning = false;

    Rng rng(seed);
    std::vector<int> z(tok_word.size());
    std::vector<int> n_k(K, 0);
    for (std::size_t t = 0; t < z.size(); ++t) {
        int k = static_cast<int>(rng.uniform_int(K));
        z[t] = k;
        ++n_k[k];
    }

    std::vector<double> p(K), acc(K, 0.0);
    for (int sweep = 0; sweep < burn_in + samples; ++sweep) {
        for (std::size_t t = 0; t < z.size(); ++t) {
            const int w = tok_word[t];
            --n_k[z[t]];
            double total = 0;
            for (int k = 0; k < K; ++k) {
                total += model.phi(k, w) * (n_k[k] + model.alpha);
                p[k] = total;
            }
            double u = rng.uniform() * total;
            int new_k = K - 1;
            for (int k = 0; k < K; ++k)
                if (u < p[k]) {
                    new_k = k;
                    break;
                }
            z[t] = new_k;
            ++n_k[new_k];
        }
        if (sweep >= burn_in)
            for (int k = 0; k < K; ++k) acc[k] += static_cast<double>(n_k[k]);
    }

    double total = 0;
    for (double v : acc) total += v;
    BoTVector phi(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) phi[k] = acc[k] / total;
    return phi;
}

// sparsity = 1 - ||phi||_0 / K, counting entries above eps.
inline double bot_sparsity(const BoTVector& bot, double eps = 1e-4) {
    if (bot.empty()) throw std::invalid_argument("bot_sparsity: empty vector");
    std::size_t nonzero = 0;
    for (double v : bot)
        if (v > eps) ++nonzero;
    return 1.0 - static_cast<double>(nonzero) / static_cast<double>(bot.size());
}

}  // namespace pgil
