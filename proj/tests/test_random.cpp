#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "zkdyn/zkdyn.hpp"

using namespace zkdyn;

namespace {
TorusPoint x0() { return sample_grid(2, 1)[0]; }

LyapunovSpectrum cat_oracle_spectrum() {
    return analytic_spectrum(cat_pair());
}
} // namespace

TEST_CASE("sample_omega") {
    SECTION("degenerate distribution emits only that letter") {
        OmegaSample w = sample_omega({{1.0, 0.0}}, 500, 42);
        for (int l : w.letters) CHECK(l == 0);
    }
    SECTION("empirical frequency concentrates (3 sigma)") {
        OmegaSample w = sample_omega({{0.5, 0.5}}, 100000, 7);
        long count0 = std::count(w.letters.begin(), w.letters.end(), 0);
        double freq = static_cast<double>(count0) / 100000.0;
        CHECK(freq > 0.494);
        CHECK(freq < 0.506);
    }
    SECTION("deterministic per (seed, model, length)") {
        OmegaSample a = sample_omega({{0.3, 0.7}}, 1000, 99);
        OmegaSample b = sample_omega({{0.3, 0.7}}, 1000, 99);
        CHECK(a.letters == b.letters);
    }
    SECTION("weights must sum to one") {
        CHECK_THROWS_AS(sample_omega({{0.3, 0.3}}, 10, 0), ValidationError);
        CHECK_THROWS_AS(sample_omega({{-0.5, 1.5}}, 10, 0), ValidationError);
    }
}

TEST_CASE("skew_step") {
    ZkAction cat = from_matrices(cat_pair());
    TorusPoint x((Vec(2) << 0.1, 0.2).finished());
    SECTION("identity generator") {
        ZkAction id = from_matrices(identity_pair());
        CHECK(torus_distance(skew_step(id, 0, x), x) == 0.0);
    }
    SECTION("cat-map generator by hand") {
        TorusPoint y = skew_step(cat, 0, x);
        CHECK(y[0] == Catch::Approx(0.4).margin(1e-12));
        CHECK(y[1] == Catch::Approx(0.3).margin(1e-12));
    }
    SECTION("second generator is A applied twice") {
        TorusPoint y = skew_step(cat, 1, x);
        TorusPoint z = skew_step(cat, 0, skew_step(cat, 0, x));
        CHECK(torus_distance(y, z) < 1e-12);
    }
}

TEST_CASE("random_exponents with a degenerate model reduces to one generator") {
    ZkAction cat = from_matrices(cat_pair());
    EstimatorConfig cfg;
    cfg.n_steps = 20000;
    RandomExponents re = random_exponents(cat, {{1.0, 0.0}}, x0(), cfg, 3);
    auto direct = qr_exponents(cat, WordCycle({{0, +1}}), x0(), cfg);
    for (const auto& row : re.per_omega)
        for (size_t j = 0; j < row.size(); ++j) CHECK(row[j] == direct[j]);
    CHECK(re.cross_omega_stddev[0] == 0.0);
}

TEST_CASE("random exponents follow the weighted generator rates") {
    ZkAction cat = from_matrices(cat_pair());
    const double l = cat_lambda();
    EstimatorConfig cfg;
    cfg.n_steps = 100000;
    SECTION("weights (0.5, 0.5): top ~ 1.5 lambda") {
        RandomExponents re = random_exponents(cat, {{0.5, 0.5}}, x0(), cfg, 4);
        CHECK(re.mean[0] == Catch::Approx(1.5 * l).margin(1e-2));
    }
    SECTION("weights (0.7, 0.3): top ~ 1.3 lambda") {
        RandomExponents re = random_exponents(cat, {{0.7, 0.3}}, x0(), cfg, 4);
        CHECK(re.mean[0] == Catch::Approx(1.3 * l).margin(1e-2));
    }
}

TEST_CASE("cross-omega stddev shrinks with n_steps") {
    ZkAction cat = from_matrices(cat_pair());
    RandomModel m{{0.5, 0.5}};
    EstimatorConfig cfg;
    cfg.burn_in = 100;
    cfg.n_steps = 10000;
    RandomExponents small = random_exponents(cat, m, x0(), cfg, 8);
    cfg.n_steps = 100000;
    RandomExponents large = random_exponents(cat, m, x0(), cfg, 8);
    CHECK(large.cross_omega_stddev[0] < small.cross_omega_stddev[0]);
    CHECK(large.cross_omega_stddev[0] < 1e-2);
}

TEST_CASE("random_entropy_pesin") {
    const double l = cat_lambda();
    LyapunovSpectrum spec = cat_oracle_spectrum();
    SECTION("all rates nonpositive gives zero") {
        LyapunovSpectrum neg;
        neg.dim = 2;
        neg.blocks = {{2, {-0.5, -1.0}}};
        CHECK(random_entropy_pesin(neg, {{0.5, 0.5}}).value == 0.0);
    }
    SECTION("cat pair, equal weights") {
        EntropyEstimate h = random_entropy_pesin(spec, {{0.5, 0.5}});
        CHECK(h.value == Catch::Approx(1.5 * l).margin(1e-9));
        CHECK(h.method == EntropyMethod::pesin_formula);
    }
    SECTION("all weight on A^2") {
        CHECK(random_entropy_pesin(spec, {{0.0, 1.0}}).value ==
              Catch::Approx(2 * l).margin(1e-9));
    }
}

TEST_CASE("random_entropy_ruelle_check") {
    LyapunovSpectrum spec = cat_oracle_spectrum();
    RandomModel m{{0.5, 0.5}};
    double pesin = random_entropy_pesin(spec, m).value;
    CHECK(random_entropy_ruelle_check(spec, m, {pesin, EntropyMethod::pesin_formula, 0.0, 1}));
    CHECK_FALSE(
        random_entropy_ruelle_check(spec, m, {pesin + 1.0, EntropyMethod::pesin_formula, 0.0, 1}));
    // equality case: matrix-oracle entropy of the mean behavior on the
    // linear SRB model sits exactly on the bound
    CHECK(random_entropy_ruelle_check(spec, m, {pesin, EntropyMethod::matrix_oracle, 1e-6, 1}));
}

TEST_CASE("random_entropy_dimension") {
    const double l = cat_lambda();
    LyapunovSpectrum spec = cat_oracle_spectrum();
    RandomModel m{{0.5, 0.5}};
    SECTION("gamma = d recovers the Pesin value") {
        std::vector<double> gammas;
        for (const auto& b : spec.blocks) gammas.push_back(b.multiplicity);
        CHECK(random_entropy_dimension(spec, m, gammas).value ==
              Catch::Approx(random_entropy_pesin(spec, m).value).margin(1e-12));
    }
    SECTION("gamma = 0 gives zero") {
        CHECK(random_entropy_dimension(spec, m, {0.0, 0.0}).value == 0.0);
    }
    SECTION("half dimension on the unstable block") {
        // blocks sorted ascending: (stable, unstable)
        CHECK(random_entropy_dimension(spec, m, {0.0, 0.5}).value ==
              Catch::Approx(0.5 * 1.5 * l).margin(1e-9));
    }
    SECTION("gamma out of range") {
        CHECK_THROWS_AS(random_entropy_dimension(spec, m, {0.0, 1.5}), GammaOutOfRange);
        CHECK_THROWS_AS(random_entropy_dimension(spec, m, {-0.1, 0.5}), GammaOutOfRange);
    }
}

TEST_CASE("subset-max identity: max over subsets equals positive-part sum") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<double> a(6);
        for (auto& x : a) x = u(rng);
        double best = 0.0;
        for (int mask = 0; mask < (1 << 6); ++mask) {
            double s = 0.0;
            for (int j = 0; j < 6; ++j)
                if (mask & (1 << j)) s += a[static_cast<size_t>(j)];
            best = std::max(best, s);
        }
        double pos = 0.0;
        for (double x : a) pos += std::max(0.0, x);
        CHECK(best == pos);
    }
}

TEST_CASE("linearity of the top random exponent in m") {
    ZkAction cat = from_matrices(cat_pair());
    const double l = cat_lambda();
    EstimatorConfig cfg;
    cfg.n_steps = 100000;
    for (double m1 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        RandomExponents re = random_exponents(cat, {{m1, 1.0 - m1}}, x0(), cfg, 2);
        double expect = m1 * l + (1.0 - m1) * 2 * l;
        CHECK(re.mean[0] == Catch::Approx(expect).margin(1e-2));
    }
}

TEST_CASE("Monte-Carlo Pesin entropy over initial points") {
    ZkAction cat = from_matrices(cat_pair());
    EstimatorConfig cfg;
    cfg.n_steps = 30000;
    cfg.burn_in = 200;
    EntropyEstimate h = random_entropy_pesin_mc(cat, {{0.5, 0.5}}, cfg, 4);
    CHECK(h.value == Catch::Approx(1.5 * cat_lambda()).margin(1e-2));
    CHECK(h.samples == 4);
    CHECK(h.stderr_ >= 0.0);
}
