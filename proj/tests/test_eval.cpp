#include <catch2/catch_amalgamated.hpp>

#include "pgil/eval.hpp"

using namespace pgil;

TEST_CASE("pool_features: constant maps, output length, batch concatenation") {
    Tensor fpa(Shape(2, 3, 4, 4));
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 16; ++i) {
            fpa.data[static_cast<std::size_t>(c) * 16 + i] = 1.5 + c;        // sample 0
            fpa.data[static_cast<std::size_t>(3 + c) * 16 + i] = -0.5 * c;   // sample 1
        }
    FeatureMatrix f = pool_features(fpa);
    REQUIRE(f.size() == 2);
    REQUIRE(f[0].size() == 3);
    for (int c = 0; c < 3; ++c) {
        REQUIRE_THAT(f[0][c], Catch::Matchers::WithinAbs(1.5 + c, 1e-12));
        REQUIRE_THAT(f[1][c], Catch::Matchers::WithinAbs(-0.5 * c, 1e-12));
    }

    // pooling commutes with batch concatenation
    Tensor one(Shape(1, 3, 4, 4));
    std::copy(fpa.data.begin(), fpa.data.begin() + 48, one.data.begin());
    FeatureMatrix f0 = pool_features(one);
    REQUIRE(f0[0] == f[0]);
}

TEST_CASE("fit_linear_probe: separable data reaches training accuracy 1") {
    Rng rng(5);
    FeatureMatrix x;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        int cls = i % 2;
        x.push_back({(cls ? 3.0 : -3.0) + 0.1 * rng.gaussian(), rng.gaussian()});
        y.push_back(cls);
    }
    ProbeModel probe = fit_linear_probe(x, y, 1e-4, 40, 7);
    std::vector<int> pred = probe.predict_all(x);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i) hits += (pred[i] == y[i]);
    REQUIRE(hits == y.size());
}

TEST_CASE("fit_linear_probe: conflicting duplicates cap accuracy at the class prior") {
    FeatureMatrix x;
    std::vector<int> y;
    for (int i = 0; i < 30; ++i) {
        x.push_back({1.0, 2.0});  // identical features
        y.push_back(i < 20 ? 0 : 1);
    }
    ProbeModel probe = fit_linear_probe(x, y, 1e-3, 30, 3);
    std::vector<int> pred = probe.predict_all(x);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i) hits += (pred[i] == y[i]);
    REQUIRE(static_cast<double>(hits) / y.size() <= 20.0 / 30.0 + 1e-12);
}

TEST_CASE("fit_linear_probe: seeded determinism and single-class rejection") {
    Rng rng(9);
    FeatureMatrix x;
    std::vector<int> y;
    for (int i = 0; i < 24; ++i) {
        x.push_back({rng.gaussian(), rng.gaussian(), rng.gaussian()});
        y.push_back(i % 3);
    }
    ProbeModel a = fit_linear_probe(x, y, 1e-3, 20, 11);
    ProbeModel b = fit_linear_probe(x, y, 1e-3, 20, 11);
    REQUIRE(a.weights == b.weights);
    REQUIRE(a.biases == b.biases);

    std::vector<int> ones(x.size(), 0);
    REQUIRE_THROWS_AS(fit_linear_probe(x, ones, 1e-3, 5, 1), std::invalid_argument);
}

TEST_CASE("probe accuracy is invariant to a consistent feature permutation") {
    Rng rng(13);
    FeatureMatrix x;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        int cls = i % 3;
        x.push_back({0.2 * rng.gaussian() + cls, 0.2 * rng.gaussian() - cls,
                     0.2 * rng.gaussian() + 0.5 * cls});
        y.push_back(cls);
    }
    FeatureMatrix xp;
    for (const auto& f : x) xp.push_back({f[2], f[0], f[1]});

    ProbeModel pa = fit_linear_probe(x, y, 1e-3, 30, 2);
    ProbeModel pb = fit_linear_probe(xp, y, 1e-3, 30, 2);
    std::vector<int> da = pa.predict_all(x), db = pb.predict_all(xp);
    std::size_t ha = 0, hb = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ha += (da[i] == y[i]);
        hb += (db[i] == y[i]);
    }
    REQUIRE(ha == hb);
}

TEST_CASE("kmeans_cluster separates two blobs; k = n gives zero inertia") {
    Rng rng(17);
    FeatureMatrix x;
    for (int i = 0; i < 50; ++i)
        x.push_back({(i % 2 ? 10.0 : -10.0) + 0.3 * rng.gaussian(), 0.3 * rng.gaussian()});
    std::vector<int> labels = kmeans_cluster(x, 2, 3);
    for (int i = 2; i < 50; ++i) {
        REQUIRE(labels[i] == labels[i % 2]);
        REQUIRE(labels[0] != labels[1]);
    }

    FeatureMatrix tiny = {{0.0}, {1.0}, {2.0}};
    KMeansResult km = kmeans(tiny, 3, 5);
    REQUIRE(km.inertia == 0.0);

    std::vector<int> a = kmeans_cluster(x, 2, 21);
    std::vector<int> b = kmeans_cluster(x, 2, 21);
    REQUIRE(a == b);
}

TEST_CASE("silhouette_score: fixtures and invariances") {
    SECTION("two distant tight blobs score above 0.9") {
        Rng rng(23);
        FeatureMatrix x;
        std::vector<int> labels;
        for (int i = 0; i < 60; ++i) {
            int c = i % 2;
            x.push_back({(c ? 50.0 : -50.0) + rng.gaussian(), rng.gaussian()});
            labels.push_back(c);
        }
        REQUIRE(silhouette_score(x, labels) > 0.9);
    }
    SECTION("random labels on one isotropic blob score near zero") {
        Rng rng(29);
        FeatureMatrix x;
        std::vector<int> labels;
        for (int i = 0; i < 1000; ++i) {
            x.push_back({rng.gaussian(), rng.gaussian(), rng.gaussian()});
            labels.push_back(static_cast<int>(rng.uniform_int(3)));
        }
        REQUIRE(std::abs(silhouette_score(x, labels)) < 0.05);
    }
    SECTION("invariant to global isometry") {
        Rng rng(31);
        FeatureMatrix x;
        std::vector<int> labels;
        for (int i = 0; i < 40; ++i) {
            int c = i % 2;
            x.push_back({2.0 * c + 0.5 * rng.gaussian(), 0.5 * rng.gaussian()});
            labels.push_back(c);
        }
        double s1 = silhouette_score(x, labels);
        // rotate by 30 degrees and translate
        double cth = std::cos(0.5235987755982988), sth = std::sin(0.5235987755982988);
        FeatureMatrix xr;
        for (const auto& p : x)
            xr.push_back({cth * p[0] - sth * p[1] + 7.0, sth * p[0] + cth * p[1] - 3.0});
        REQUIRE(std::abs(silhouette_score(xr, labels) - s1) < 1e-9);
    }
    SECTION("one cluster is rejected") {
        FeatureMatrix x = {{0.0}, {1.0}};
        REQUIRE_THROWS_AS(silhouette_score(x, {0, 0}), std::invalid_argument);
    }
    SECTION("singleton clusters contribute zero") {
        FeatureMatrix x = {{0.0}, {0.1}, {50.0}};
        std::vector<int> labels = {0, 0, 1};
        double s = silhouette_score(x, labels);
        // third point is a singleton: (s0 + s1 + 0) / 3
        REQUIRE(s > 0.0);
        REQUIRE(s < 1.0);
    }
}

TEST_CASE("classification_report: exact fixtures") {
    SECTION("perfect predictions") {
        MetricsReport r = classification_report({0, 1, 2, 1}, {0, 1, 2, 1});
        REQUIRE(r.overall_accuracy == 1.0);
        for (double f : r.f1) REQUIRE(f == 1.0);
        REQUIRE(r.macro_f1 == 1.0);
    }
    SECTION("all one class predicted on balanced data") {
        MetricsReport r = classification_report({0, 0, 0, 0}, {0, 0, 1, 1});
        REQUIRE_THAT(r.overall_accuracy, Catch::Matchers::WithinAbs(0.5, 1e-12));
        REQUIRE(r.recall[1] == 0.0);
        REQUIRE(r.zero_division);
    }
    SECTION("confusion rows sum to class supports, OA = trace/total") {
        std::vector<int> truth = {0, 0, 0, 1, 1, 2, 2, 2, 2};
        std::vector<int> pred = {0, 1, 0, 1, 1, 2, 0, 2, 2};
        MetricsReport r = classification_report(pred, truth);
        std::vector<std::size_t> support(3, 0);
        for (int t : truth) ++support[t];
        std::size_t trace = 0;
        for (int c = 0; c < 3; ++c) {
            std::size_t row = 0;
            for (int o = 0; o < 3; ++o) row += r.confusion[c][o];
            REQUIRE(row == support[c]);
            trace += r.confusion[c][c];
        }
        REQUIRE_THAT(r.overall_accuracy,
                     Catch::Matchers::WithinAbs(static_cast<double>(trace) / truth.size(), 1e-12));
    }
    SECTION("empty input is rejected") {
        REQUIRE_THROWS_AS(classification_report({}, {}), std::invalid_argument);
    }
}
