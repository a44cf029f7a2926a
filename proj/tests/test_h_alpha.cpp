#include <catch2/catch_amalgamated.hpp>

#include "pgil/h_alpha.hpp"
#include "pgil/rng.hpp"

using namespace pgil;

namespace {

CMat random_psd(Rng& rng, int dim) {
    CMat a(dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) a.at(r, c) = cd(rng.gaussian(), rng.gaussian());
    CMat h(dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
            cd s = 0;
            for (int k = 0; k < dim; ++k) s += a.at(r, k) * std::conj(a.at(c, k));
            h.at(r, c) = s;
        }
    return h;
}

// closed-form entropy oracle: -sum p_i log_dim p_i
double entropy_oracle(std::vector<double> lam, int dim) {
    double total = 0;
    for (double l : lam) total += l;
    double h = 0;
    for (double l : lam) {
        double p = l / total;
        if (p > 0) h -= p * std::log(p) / std::log(static_cast<double>(dim));
    }
    return h;
}

}  // namespace

TEST_CASE("h_alpha_decompose: rank-1 coherency has zero entropy and alpha") {
    HAlpha r = h_alpha_decompose(CMat::diag({1.0, 0.0, 0.0}));
    REQUIRE_THAT(r.entropy, Catch::Matchers::WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(r.alpha_deg, Catch::Matchers::WithinAbs(0.0, 1e-12));
    REQUIRE_FALSE(r.no_signal);
}

TEST_CASE("h_alpha_decompose: identity/3 has unit entropy") {
    HAlpha r = h_alpha_decompose(CMat::identity(3) * (1.0 / 3.0));
    REQUIRE_THAT(r.entropy, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("h_alpha_decompose: diag(0.5,0.3,0.2) entropy against the closed form") {
    HAlpha r = h_alpha_decompose(CMat::diag({0.5, 0.3, 0.2}));
    double want = entropy_oracle({0.5, 0.3, 0.2}, 3);
    REQUIRE_THAT(r.entropy, Catch::Matchers::WithinAbs(want, 1e-12));
    REQUIRE_THAT(r.entropy, Catch::Matchers::WithinAbs(0.937, 5e-4));
    // diagonal matrix: eigenvectors are unit axes, alpha = p2*90 + p3*90
    REQUIRE_THAT(r.alpha_deg, Catch::Matchers::WithinAbs(0.5 * 90.0, 1e-9));
}

TEST_CASE("h_alpha_decompose: zero trace yields the no-signal sentinel") {
    HAlpha r = h_alpha_decompose(CMat::zero(3));
    REQUIRE(r.no_signal);
    REQUIRE(r.entropy == 0.0);
    REQUIRE(r.alpha_deg == 0.0);
}

TEST_CASE("h_alpha_decompose: dual-pol entropy uses log base 2") {
    HAlpha r = h_alpha_decompose(CMat::diag({0.5, 0.5}));
    REQUIRE_THAT(r.entropy, Catch::Matchers::WithinAbs(1.0, 1e-12));
    r = h_alpha_decompose(CMat::diag({0.8, 0.2}));
    REQUIRE_THAT(r.entropy, Catch::Matchers::WithinAbs(entropy_oracle({0.8, 0.2}, 2), 1e-12));
}

TEST_CASE("entropy is invariant to positive scaling of the coherency matrix") {
    Rng rng(19);
    for (int trial = 0; trial < 40; ++trial) {
        CMat t = random_psd(rng, 3);
        double h1 = h_alpha_decompose(t).entropy;
        for (double s : {0.1, 1.0, 10.0}) {
            CMat scaled = t;
            scaled *= s;
            REQUIRE(std::abs(h_alpha_decompose(scaled).entropy - h1) < 1e-10);
        }
    }
}

TEST_CASE("h_alpha ranges hold on random inputs") {
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        CMat t = random_psd(rng, (trial % 2) ? 2 : 3);
        HAlpha r = h_alpha_decompose(t);
        REQUIRE(r.entropy >= 0.0);
        REQUIRE(r.entropy <= 1.0 + 1e-9);
        REQUIRE(r.alpha_deg >= 0.0);
        REQUIRE(r.alpha_deg <= 90.0 + 1e-9);
    }
}

TEST_CASE("h_alpha_zone: representative placements") {
    REQUIRE(h_alpha_zone(0.2, 10.0) == 9);    // low-entropy surface
    REQUIRE(h_alpha_zone_name(9) == std::string("low-entropy surface"));
    REQUIRE(h_alpha_zone(0.95, 70.0) == 1);   // high-entropy multiple scattering
    REQUIRE(h_alpha_zone_name(1) == std::string("high-entropy multiple scattering"));
    REQUIRE(h_alpha_zone(0.2, 88.0) == 7);    // low-entropy multiple scattering
    REQUIRE(h_alpha_zone(0.2, 45.0) == 8);    // low-entropy dipole
}

TEST_CASE("h_alpha_zone: boundaries are inclusive on the lower edge") {
    // H = 0.5 belongs to the mid band; alpha = 40 belongs to its mid band
    REQUIRE(h_alpha_zone(0.5, 40.0) == 5);
    REQUIRE(h_alpha_zone(0.5 - 1e-9, 39.9) == 9);
    REQUIRE(h_alpha_zone(0.9, 55.0) == 1);
    REQUIRE(h_alpha_zone(0.9 - 1e-12, 50.0) == 4);
}

TEST_CASE("h_alpha_zone clamps out-of-range inputs") {
    REQUIRE(h_alpha_zone(-0.1, -5.0) == 9);
    REQUIRE(h_alpha_zone(1.2, 95.0) == 1);
}
