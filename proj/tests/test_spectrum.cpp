#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "zkdyn/zkdyn.hpp"

using namespace zkdyn;

namespace {

TorusPoint x0() { return sample_grid(2, 1)[0]; }

// brute force over all set partitions of the tuple indices: a partition is
// admissible when every part is connected under the sup-norm epsilon
// relation; the grouping must equal the finest admissible coarsening of
// the epsilon graph's connected components
std::vector<int> component_oracle(const std::vector<std::vector<double>>& tuples, double eps) {
    const size_t n = tuples.size();
    std::vector<int> label(n, -1);
    int next = 0;
    for (size_t a = 0; a < n; ++a) {
        if (label[a] >= 0) continue;
        label[a] = next++;
        // BFS over the epsilon relation
        std::vector<size_t> queue{a};
        while (!queue.empty()) {
            size_t c = queue.back();
            queue.pop_back();
            for (size_t b = 0; b < n; ++b) {
                if (label[b] >= 0) continue;
                double sup = 0;
                for (size_t i = 0; i < tuples[c].size(); ++i)
                    sup = std::max(sup, std::fabs(tuples[c][i] - tuples[b][i]));
                if (sup <= eps) {
                    label[b] = label[a];
                    queue.push_back(b);
                }
            }
        }
    }
    return label;
}

} // namespace

TEST_CASE("qr_exponents on the identity action is zero") {
    ZkAction id = from_matrices(identity_pair());
    EstimatorConfig cfg;
    cfg.n_steps = 2000;
    cfg.burn_in = 10;
    auto rates = qr_exponents(id, WordCycle({{0, +1}, {1, +1}}), x0(), cfg);
    for (double r : rates) CHECK(r == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("qr_exponents recovers the cat-map eigenvalue log") {
    ZkAction cat = from_matrices({cat_matrix()});
    EstimatorConfig cfg;
    cfg.n_steps = 100000;
    auto rates = qr_exponents(cat, WordCycle({{0, +1}}), x0(), cfg);
    CHECK(rates[0] == Catch::Approx(cat_lambda()).margin(1e-3));
    CHECK(rates[1] == Catch::Approx(-cat_lambda()).margin(1e-3));
}

TEST_CASE("alternating A, A^-1 cancels exactly") {
    ZkAction cat = from_matrices({cat_matrix()});
    EstimatorConfig cfg;
    cfg.n_steps = 10000;
    cfg.burn_in = 0;
    auto rates = qr_exponents(cat, WordCycle({{0, +1}, {0, -1}}), x0(), cfg);
    CHECK(std::fabs(rates[0]) < 1e-6);
    CHECK(std::fabs(rates[1]) < 1e-6);
}

TEST_CASE("qr_exponents honors reorth_period") {
    ZkAction cat = from_matrices({cat_matrix()});
    EstimatorConfig cfg;
    cfg.n_steps = 50000;
    cfg.reorth_period = 5;
    auto rates = qr_exponents(cat, WordCycle({{0, +1}}), x0(), cfg);
    CHECK(rates[0] == Catch::Approx(cat_lambda()).margin(1e-3));
}

TEST_CASE("degenerate tangent map raises DegenerateFrame") {
    MapDescriptor singular{[](const Vec& x) { return x; }, [](const Vec& x) { return x; },
                           [](const Vec&) { return Mat::Zero(2, 2); },
                           [](const Vec&) { return Mat::Zero(2, 2); }};
    ZkAction bad({singular}, 2, 1e-9);
    EstimatorConfig cfg;
    cfg.n_steps = 10;
    cfg.burn_in = 0;
    CHECK_THROWS_AS(qr_exponents(bad, WordCycle({{0, +1}}), x0(), cfg), DegenerateFrame);
}

TEST_CASE("generator_spectrum of the identity action") {
    ZkAction id = from_matrices(identity_pair());
    EstimatorConfig cfg;
    cfg.n_steps = 2000;
    cfg.burn_in = 10;
    LyapunovSpectrum s = generator_spectrum(id, x0(), cfg);
    REQUIRE(s.blocks.size() == 1);
    CHECK(s.blocks[0].multiplicity == 2);
    CHECK(s.blocks[0].rates[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(s.blocks[0].rates[1] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("generator_spectrum of (A, A^2)") {
    ZkAction cat = from_matrices(cat_pair());
    EstimatorConfig cfg;
    cfg.n_steps = 100000;
    LyapunovSpectrum s = generator_spectrum(cat, x0(), cfg);
    const double l = cat_lambda();
    REQUIRE(s.blocks.size() == 2);
    CHECK(s.blocks[0].multiplicity == 1);
    CHECK(s.blocks[1].multiplicity == 1);
    CHECK(s.blocks[0].rates[0] == Catch::Approx(-l).margin(1e-3));
    CHECK(s.blocks[0].rates[1] == Catch::Approx(-2 * l).margin(1e-3));
    CHECK(s.blocks[1].rates[0] == Catch::Approx(l).margin(1e-3));
    CHECK(s.blocks[1].rates[1] == Catch::Approx(2 * l).margin(1e-3));
}

TEST_CASE("generator_spectrum of (A, A^-1)") {
    ZkAction cat = from_matrices(cat_inverse_pair());
    EstimatorConfig cfg;
    cfg.n_steps = 100000;
    LyapunovSpectrum s = generator_spectrum(cat, x0(), cfg);
    const double l = cat_lambda();
    REQUIRE(s.blocks.size() == 2);
    // block order ties to sum of rates (= 0 for both); accept either order
    std::vector<std::vector<double>> got = {s.blocks[0].rates, s.blocks[1].rates};
    std::sort(got.begin(), got.end());
    CHECK(got[0][0] == Catch::Approx(-l).margin(1e-3));
    CHECK(got[0][1] == Catch::Approx(l).margin(1e-3));
    CHECK(got[1][0] == Catch::Approx(l).margin(1e-3));
    CHECK(got[1][1] == Catch::Approx(-l).margin(1e-3));
}

TEST_CASE("group_exponents") {
    SECTION("all equal tuples collapse to one block") {
        std::vector<std::vector<double>> t(4, {0.5, 0.25});
        auto g = group_exponents(t, 0.1);
        REQUIRE(g.blocks.size() == 1);
        CHECK(g.blocks[0].multiplicity == 4);
    }
    SECTION("well separated tuples stay apart") {
        std::vector<std::vector<double>> t = {{0.96, 1.92}, {-0.96, -1.92}};
        auto g = group_exponents(t, 0.1);
        REQUIRE(g.blocks.size() == 2);
        CHECK(g.blocks[0].multiplicity == 1);
        CHECK(g.blocks[1].multiplicity == 1);
    }
    SECTION("transitive chaining merges a chain") {
        // 0.0 and 0.12 are farther apart than eps but joined through 0.05
        std::vector<std::vector<double>> t = {{0.0}, {0.05}, {0.12}};
        auto g = group_exponents(t, 0.07);
        REQUIRE(g.blocks.size() == 1);
        CHECK(g.blocks[0].multiplicity == 3);
        // independent connected-component oracle agrees
        auto lbl = component_oracle(t, 0.07);
        CHECK(std::count(lbl.begin(), lbl.end(), lbl[0]) == 3);
    }
    SECTION("matches the component oracle on random inputs") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<std::vector<double>> t;
            for (int j = 0; j < 6; ++j) t.push_back({u(rng), u(rng)});
            auto g = group_exponents(t, 0.3);
            auto lbl = component_oracle(t, 0.3);
            int n_components = *std::max_element(lbl.begin(), lbl.end()) + 1;
            CHECK(static_cast<int>(g.blocks.size()) == n_components);
            int total = 0;
            for (const auto& b : g.blocks) total += b.multiplicity;
            CHECK(total == 6);
        }
    }
    SECTION("boundary-straddling rates set the ambiguity flag") {
        std::vector<std::vector<double>> t = {{0.0}, {0.05}};
        CHECK(group_exponents(t, 0.06).ambiguous); // eps/2 splits them
        std::vector<std::vector<double>> far = {{0.0}, {10.0}};
        CHECK_FALSE(group_exponents(far, 0.06).ambiguous);
    }
}

TEST_CASE("volume conservation: per-generator rates sum to zero") {
    ZkAction cat = from_matrices(cat_pair());
    EstimatorConfig cfg;
    cfg.n_steps = 100000;
    LyapunovSpectrum s = generator_spectrum(cat, x0(), cfg);
    for (int i = 0; i < 2; ++i) {
        double sum = 0;
        for (const auto& b : s.blocks) sum += b.multiplicity * b.rates[static_cast<size_t>(i)];
        CHECK(std::fabs(sum) < 1e-3);
    }
}

TEST_CASE("additivity: top exponent of T^(t1,t2) is t1*l + t2*2l") {
    ZkAction cat = from_matrices(cat_pair());
    const double l = cat_lambda();
    EstimatorConfig cfg;
    cfg.n_steps = 40000;
    cfg.burn_in = 200;
    for (int t1 = -3; t1 <= 3; t1 += 3) {
        for (int t2 = -3; t2 <= 3; t2 += 2) {
            if (t1 == 0 && t2 == 0) continue;
            LatticeVector n(2);
            n << t1, t2;
            SignedWord word = lattice_word(n);
            auto rates = qr_exponents(cat, WordCycle(word), x0(), cfg);
            double per_word = rates[0] * static_cast<double>(word.size());
            double expect = std::fabs(t1 * l + t2 * 2 * l);
            CHECK(per_word == Catch::Approx(expect).margin(1e-2));
        }
    }
}

TEST_CASE("backward limit: inverse word negates the exponents") {
    ZkAction cat = from_matrices({cat_matrix()});
    EstimatorConfig cfg;
    cfg.n_steps = 50000;
    auto fwd = qr_exponents(cat, WordCycle({{0, +1}}), x0(), cfg);
    auto bwd = qr_exponents(cat, WordCycle({{0, -1}}), x0(), cfg);
    CHECK(fwd[0] == Catch::Approx(-bwd[1]).margin(2e-3));
    CHECK(fwd[1] == Catch::Approx(-bwd[0]).margin(2e-3));
}

TEST_CASE("identical configs produce bit-identical spectra") {
    ZkAction cat = from_matrices(cat_pair());
    EstimatorConfig cfg;
    cfg.n_steps = 20000;
    LyapunovSpectrum a = generator_spectrum(cat, x0(), cfg);
    LyapunovSpectrum b = generator_spectrum(cat, x0(), cfg);
    REQUIRE(a.blocks.size() == b.blocks.size());
    for (size_t j = 0; j < a.blocks.size(); ++j)
        for (size_t i = 0; i < a.blocks[j].rates.size(); ++i)
            CHECK(a.blocks[j].rates[i] == b.blocks[j].rates[i]);
}

TEST_CASE("EstimatorConfig validation") {
    EstimatorConfig cfg;
    cfg.n_steps = 10;
    cfg.burn_in = 10;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.burn_in = 0;
    cfg.reorth_period = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.reorth_period = 1;
    cfg.grouping_epsilon = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
