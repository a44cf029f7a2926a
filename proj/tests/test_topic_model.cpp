#include <catch2/catch_amalgamated.hpp>

#include "pgil/topic_model.hpp"
#include "support/oracles.hpp"

using namespace pgil;

namespace {

ScatteringLabelMap constant_map(int h, int w, int n_s, std::uint8_t label) {
    ScatteringLabelMap map(h, w, n_s);
    for (std::uint8_t& l : map.labels) l = label;
    return map;
}

// generative corpus: K disjoint-support topics over V words
struct GenerativeCorpus {
    Corpus corpus;
    std::vector<std::vector<double>> truth_topics;
};

GenerativeCorpus make_generative_corpus(int k, int v, int n_docs, int doc_len,
                                        std::uint64_t seed) {
    GenerativeCorpus out;
    out.corpus.n_words = v;
    int span = v / k;
    Rng rng(seed);
    out.truth_topics.assign(k, std::vector<double>(v, 0.0));
    for (int t = 0; t < k; ++t) {
        double total = 0;
        std::vector<double> w(span);
        for (int i = 0; i < span; ++i) {
            w[i] = 0.5 + rng.uniform();
            total += w[i];
        }
        for (int i = 0; i < span; ++i) out.truth_topics[t][t * span + i] = w[i] / total;
    }
    for (int d = 0; d < n_docs; ++d) {
        // sparse Dirichlet-ish doc-topic draw: one dominant topic
        int dominant = static_cast<int>(rng.uniform_int(k));
        Document doc(v, 0);
        for (int i = 0; i < doc_len; ++i) {
            int topic = (rng.uniform() < 0.85) ? dominant : static_cast<int>(rng.uniform_int(k));
            double u = rng.uniform(), acc = 0;
            int word = topic * span;
            for (int w = 0; w < v; ++w) {
                acc += out.truth_topics[topic][w];
                if (u < acc) {
                    word = w;
                    break;
                }
            }
            ++doc[word];
        }
        out.corpus.docs.push_back(doc);
    }
    return out;
}

}  // namespace

TEST_CASE("extract_word_vectors: constant map gives one-hot histograms") {
    ScatteringLabelMap map = constant_map(16, 16, 9, 4);
    Rng rng(3);
    auto words = extract_word_vectors(map, 8, 20, rng);
    REQUIRE(words.size() == 20);
    for (const WordVector& w : words) {
        REQUIRE(w.size() == 9);
        REQUIRE(w[4] == 1.0);
        double sum = 0;
        for (double x : w) sum += x;
        REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("extract_word_vectors: crops inside one half of a split map are one-hot") {
    ScatteringLabelMap map(16, 32, 2);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 32; ++c) map.at(r, c) = (c < 16) ? 0 : 1;
    WordVector left = label_histogram(map, 4, 2, 8);
    WordVector right = label_histogram(map, 4, 20, 8);
    REQUIRE(left[0] == 1.0);
    REQUIRE(left[1] == 0.0);
    REQUIRE(right[1] == 1.0);
}

TEST_CASE("extract_word_vectors: histograms always sum to one") {
    ScatteringLabelMap map(16, 16, 5);
    Rng fill(9);
    for (std::uint8_t& l : map.labels) l = static_cast<std::uint8_t>(fill.uniform_int(5));
    Rng rng(10);
    for (const WordVector& w : extract_word_vectors(map, 8, 50, rng)) {
        double sum = 0;
        for (double x : w) sum += x;
        REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("extract_word_vectors rejects maps smaller than the crop") {
    ScatteringLabelMap map = constant_map(4, 16, 3, 0);
    Rng rng(1);
    REQUIRE_THROWS_AS(extract_word_vectors(map, 8, 5, rng), std::invalid_argument);
}

TEST_CASE("build_vocabulary: N_v distinct points become the centers with zero inertia") {
    std::vector<WordVector> words;
    for (int i = 0; i < 6; ++i) {
        WordVector w(6, 0.0);
        w[i] = 1.0;
        words.push_back(w);
    }
    Vocabulary vocab = build_vocabulary(words, 6, 42);
    REQUIRE(vocab.size() == 6);
    REQUIRE_FALSE(vocab.duplicated_centers);
    // every word maps onto itself exactly
    for (int i = 0; i < 6; ++i) {
        int c = vocab.assign(words[i]);
        for (int d = 0; d < 6; ++d) REQUIRE(vocab.centers[c][d] == words[i][d]);
    }
}

TEST_CASE("build_vocabulary: Lloyd inertia trace is non-increasing") {
    Rng rng(8);
    std::vector<WordVector> words;
    for (int i = 0; i < 300; ++i) {
        WordVector w(9);
        double sum = 0;
        for (double& x : w) {
            x = rng.uniform();
            sum += x;
        }
        for (double& x : w) x /= sum;
        words.push_back(w);
    }
    KMeansResult km = vocabulary_kmeans_trace(words, 12, 4);
    for (std::size_t i = 1; i < km.inertia_trace.size(); ++i)
        REQUIRE(km.inertia_trace[i] <= km.inertia_trace[i - 1] + 1e-12);
}

TEST_CASE("build_vocabulary flags duplicated centers when words collide") {
    std::vector<WordVector> words(10, WordVector{1.0, 0.0});
    Vocabulary vocab = build_vocabulary(words, 3, 7);
    REQUIRE(vocab.duplicated_centers);
}

TEST_CASE("encode_document: constant map puts all mass on its word") {
    ScatteringLabelMap map = constant_map(64, 64, 9, 2);
    WordVector onehot(9, 0.0);
    onehot[2] = 1.0;
    Vocabulary vocab;
    vocab.n_s = 9;
    vocab.centers = {WordVector(9, 1.0 / 9), onehot};
    Document doc = encode_document(map, vocab);

    int tiles = ((64 - 8) / 4 + 1) * ((64 - 8) / 4 + 1);
    REQUIRE(doc[1] == tiles);
    REQUIRE(doc[0] == 0);
}

TEST_CASE("encode_document: total count equals the tile arithmetic") {
    ScatteringLabelMap map = constant_map(30, 23, 4, 1);
    Vocabulary vocab;
    vocab.n_s = 4;
    vocab.centers = {WordVector(4, 0.25)};
    Document doc = encode_document(map, vocab);
    int want = ((30 - 8) / 4 + 1) * ((23 - 8) / 4 + 1);
    int total = 0;
    for (int c : doc) total += c;
    REQUIRE(total == want);
}

TEST_CASE("encode_document: permuting the vocabulary permutes counts identically") {
    ScatteringLabelMap map(32, 32, 3);
    Rng fill(13);
    for (std::uint8_t& l : map.labels) l = static_cast<std::uint8_t>(fill.uniform_int(3));

    // generic centers so no tile histogram is ever equidistant to two of them
    Vocabulary vocab;
    vocab.n_s = 3;
    vocab.centers = {{0.81, 0.11, 0.08}, {0.13, 0.72, 0.15}, {0.29, 0.31, 0.40}};
    Document a = encode_document(map, vocab);

    Vocabulary swapped = vocab;
    std::swap(swapped.centers[0], swapped.centers[2]);
    Document b = encode_document(map, swapped);
    REQUIRE(a[0] == b[2]);
    REQUIRE(a[2] == b[0]);
    REQUIRE(a[1] == b[1]);
}

TEST_CASE("train_lda recovers disjoint-support topics within TV 0.1") {
    GenerativeCorpus gen = make_generative_corpus(5, 20, 300, 80, 77);
    LdaModel model = train_lda(gen.corpus, 5, 50.0 / 5, 0.01, 300, 101);

    std::vector<std::vector<double>> rows;
    for (int k = 0; k < 5; ++k)
        rows.emplace_back(model.topic_word.begin() + k * 20,
                          model.topic_word.begin() + (k + 1) * 20);
    REQUIRE(oracles::best_permutation_max_tv(rows, gen.truth_topics) <= 0.1);
}

TEST_CASE("train_lda: topic-word rows sum to one") {
    GenerativeCorpus gen = make_generative_corpus(3, 12, 60, 40, 5);
    LdaModel model = train_lda(gen.corpus, 3, 50.0 / 3, 0.01, 50, 11);
    for (int k = 0; k < 3; ++k) {
        double sum = 0;
        for (int w = 0; w < 12; ++w) sum += model.phi(k, w);
        REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("train_lda: fixed seed gives a bit-identical model") {
    GenerativeCorpus gen = make_generative_corpus(4, 16, 80, 30, 21);
    LdaModel a = train_lda(gen.corpus, 4, 12.5, 0.01, 60, 3);
    LdaModel b = train_lda(gen.corpus, 4, 12.5, 0.01, 60, 3);
    REQUIRE(a.topic_word == b.topic_word);
}

TEST_CASE("train_lda rejects empty and all-zero corpora") {
    Corpus empty;
    empty.n_words = 10;
    REQUIRE_THROWS_AS(train_lda(empty, 3, 1.0, 0.01, 10, 1), std::invalid_argument);

    Corpus zeros;
    zeros.n_words = 10;
    zeros.docs.assign(5, Document(10, 0));
    REQUIRE_THROWS_AS(train_lda(zeros, 3, 1.0, 0.01, 10, 1), std::invalid_argument);
}

TEST_CASE("infer_bot: topic mixtures sum to one and are non-negative") {
    GenerativeCorpus gen = make_generative_corpus(5, 20, 200, 60, 31);
    LdaModel model = train_lda(gen.corpus, 5, 10.0, 0.01, 150, 7);
    for (int d = 0; d < 20; ++d) {
        BoTVector phi = infer_bot(gen.corpus.docs[d], model, 50, 50, 1000 + d);
        double sum = 0;
        for (double v : phi) {
            REQUIRE(v >= 0.0);
            sum += v;
        }
        REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-6));
    }
}

TEST_CASE("infer_bot: a document emitted by one topic concentrates there") {
    // separable model: delta-like topics
    LdaModel model;
    model.n_topics = 4;
    model.n_words = 8;
    model.alpha = 0.1;
    model.beta = 0.01;
    model.topic_word.assign(4 * 8, 1e-6);
    for (int k = 0; k < 4; ++k) {
        model.topic_word[static_cast<std::size_t>(k) * 8 + 2 * k] = 0.5;
        model.topic_word[static_cast<std::size_t>(k) * 8 + 2 * k + 1] = 0.5;
    }
    Document doc(8, 0);
    doc[4] = 30;
    doc[5] = 25;  // words of topic 2 only
    BoTVector phi = infer_bot(doc, model, 50, 50, 9);
    REQUIRE(phi[2] >= 0.9);
}

TEST_CASE("infer_bot: empty document warns and returns uniform") {
    LdaModel model;
    model.n_topics = 5;
    model.n_words = 4;
    model.alpha = 1.0;
    model.beta = 0.01;
    model.topic_word.assign(20, 0.25);
    bool warned = false;
    BoTVector phi = infer_bot(Document(4, 0), model, 10, 10, 1, &warned);
    REQUIRE(warned);
    for (double v : phi) REQUIRE_THAT(v, Catch::Matchers::WithinAbs(0.2, 1e-12));
}

TEST_CASE("infer_bot: same seed gives identical phi") {
    GenerativeCorpus gen = make_generative_corpus(3, 12, 50, 40, 71);
    LdaModel model = train_lda(gen.corpus, 3, 1.0, 0.01, 40, 2);
    BoTVector a = infer_bot(gen.corpus.docs[0], model, 20, 20, 55);
    BoTVector b = infer_bot(gen.corpus.docs[0], model, 20, 20, 55);
    REQUIRE(a == b);
}

TEST_CASE("bot_sparsity arithmetic") {
    BoTVector bot(175, 0.0);
    for (int i = 0; i < 5; ++i) bot[i * 30] = 0.2;
    REQUIRE_THAT(bot_sparsity(bot), Catch::Matchers::WithinAbs(1.0 - 5.0 / 175.0, 1e-12));

    BoTVector uniform(175, 1.0 / 175.0);
    REQUIRE(bot_sparsity(uniform) == 0.0);
}
