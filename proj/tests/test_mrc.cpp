#include <stdexcept>
#include <cmath>
#include <random>

#include "doctest.h"
#include "mrc.hpp"
#include "noise_sim.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using mrd::DyadicSquare;
using mrd::PartitionFamily;
using mrd::PixelGrid;
using mrd::Residuals;
using mrd::Threshold;

namespace {

PixelGrid normal_grid(int n, uint64_t seed) {
    PixelGrid g(n, n);
    auto gen = mrd::rng::engine(seed);
    mrd::rng::fill_standard_normal(gen, g.data(), g.size());
    return g;
}

}  // namespace

TEST_CASE("coefficient basics") {
    SUBCASE("constant residuals c over m pixels give c sqrt(m)") {
        const PixelGrid g(8, 8, 0.75);
        const auto sat = mrd::build_sat(g);
        const DyadicSquare sq{2, 4, 0, 0};  // 4x4 = 16 pixels
        CHECK(mrd::coefficient(sat, sq) == doctest::Approx(0.75 * 4.0).epsilon(1e-12));
    }
    SUBCASE("zero residuals give zero") {
        const auto sat = mrd::build_sat(PixelGrid(4, 4, 0.0));
        CHECK(mrd::coefficient(sat, DyadicSquare{1, 0, 0, 0}) == 0.0);
    }
    SUBCASE("random grid, all dyadic squares vs the oracle") {
        const PixelGrid g = normal_grid(16, 3);
        const auto sat = mrd::build_sat(g);
        for (const DyadicSquare& sq : mrd::enumerate_dyadic(16, 1).squares) {
            const double brute =
                oracle::rect_sum(g, sq.i0, sq.i0 + sq.side() - 1, sq.j0,
                                 sq.j0 + sq.side() - 1) /
                std::sqrt(static_cast<double>(sq.pixel_count()));
            REQUIRE(mrd::coefficient(sat, sq) == doctest::Approx(brute).epsilon(1e-10));
        }
    }
}

TEST_CASE("coefficient homogeneity and parent decomposition") {
    const PixelGrid g = normal_grid(8, 9);
    PixelGrid g3 = g;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) g3(i, j) *= 3.0;
    const auto sat = mrd::build_sat(g);
    const auto sat3 = mrd::build_sat(g3);
    const PartitionFamily fam = mrd::enumerate_dyadic(8, 1);
    for (const DyadicSquare& sq : fam.squares) {
        CHECK(mrd::coefficient(sat3, sq) ==
              doctest::Approx(3.0 * mrd::coefficient(sat, sq)).epsilon(1e-12));
        // omega_P sqrt(#P) equals the sum of the children's omega sqrt(#C).
        double child_sum = 0.0;
        bool has_children = false;
        for (int c : fam.children[sq.id]) {
            if (c < 0) continue;
            has_children = true;
            const DyadicSquare& ch = fam.squares[c];
            child_sum += mrd::coefficient(sat, ch) *
                         std::sqrt(static_cast<double>(ch.pixel_count()));
        }
        if (has_children) {
            const double own = mrd::coefficient(sat, sq) *
                               std::sqrt(static_cast<double>(sq.pixel_count()));
            CHECK(own == doctest::Approx(child_sum).epsilon(1e-9));
        }
    }
}

TEST_CASE("sigma estimator") {
    SUBCASE("affine images give exactly zero") {
        PixelGrid g(16, 16);
        for (int i = 0; i < 16; ++i)
            for (int j = 0; j < 16; ++j) g(i, j) = 2.0 + 0.3 * i - 1.7 * j;
        CHECK(mrd::estimate_sigma(g) == 0.0);
    }
    SUBCASE("constant images give zero") {
        CHECK(mrd::estimate_sigma(PixelGrid(8, 8, 3.0)) == 0.0);
    }
    SUBCASE("even-length median averages the central order statistics") {
        const PixelGrid g(3, 3, {0, 0, 0, 0, 2, 2, 0, 2, 10});
        // |double differences| are {2, 0, 0, 8}; median (0 + 2)/2 = 1.
        CHECK(mrd::estimate_sigma(g) == doctest::Approx(0.7413011092528009).epsilon(1e-9));
    }
    SUBCASE("consistent on pure noise") {
        for (uint64_t seed : {11u, 12u, 13u}) {
            const PixelGrid y = mrd::add_gaussian_noise(PixelGrid(256, 256, 0.0), 1.0, seed);
            CHECK(mrd::estimate_sigma(y) == doctest::Approx(1.0).epsilon(0.05));
        }
    }
    SUBCASE("too small grids are rejected") {
        CHECK_THROWS_AS(mrd::estimate_sigma(PixelGrid(1, 5, 0.0)), std::invalid_argument);
    }
}

TEST_CASE("poisson normalization") {
    SUBCASE("y equal to fhat gives zero residuals") {
        const PixelGrid f(4, 4, 50.0);
        const Residuals r = mrd::normalize_poisson(f, f);
        for (double v : r.grid.values()) CHECK(v == 0.0);
        CHECK(r.sigma == 1.0);
        CHECK(r.model == mrd::NoiseModel::poisson);
    }
    SUBCASE("direct formula") {
        PixelGrid f(2, 2, 100.0);
        PixelGrid y = f;
        y(0, 1) = 110.0;
        const Residuals r = mrd::normalize_poisson(y, f);
        CHECK(r.grid(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.grid(0, 0) == 0.0);
    }
    SUBCASE("intensities below the floor are rejected") {
        CHECK_THROWS_WITH_AS(mrd::normalize_poisson(PixelGrid(2, 2, 5.0), PixelGrid(2, 2, 5.0)),
                             "intensity too small for Gaussian approximation",
                             std::invalid_argument);
    }
    SUBCASE("simulated counts give unit-variance residuals") {
        PixelGrid f(256, 256);
        auto gen = mrd::rng::engine(17);
        std::uniform_real_distribution<double> dist(50.0, 100.0);
        for (int i = 0; i < 256; ++i)
            for (int j = 0; j < 256; ++j) f(i, j) = dist(gen);
        const PixelGrid y = mrd::add_poisson_noise(f, 18);
        const Residuals r = mrd::normalize_poisson(y, f);
        CHECK(oracle::sample_std(r.grid.values()) == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("scan finds violations smallest scale first") {
    const int n = 256;
    const PartitionFamily fam = mrd::enumerate_dyadic(n, 1);
    SUBCASE("zero residuals scan clean") {
        const Residuals r{PixelGrid(n, n, 0.0), mrd::NoiseModel::gaussian, 1.0};
        CHECK(mrd::scan(r, fam, Threshold{1.0, 2.0, n}).empty());
    }
    SUBCASE("an isolated spike is reported first as its own pixel") {
        PixelGrid g(n, n, 0.0);
        g(100, 37) = 10.0;  // 10 sigma, against threshold sqrt(2 log n^2) ~ 4.71
        const Residuals r{std::move(g), mrd::NoiseModel::gaussian, 1.0};
        const auto v = mrd::scan(r, fam, Threshold{1.0, 2.0, n});
        REQUIRE(!v.empty());
        const DyadicSquare& first = fam.squares[v[0].subset_id];
        CHECK(first.level == 0);
        CHECK(first.i0 == 100);
        CHECK(first.j0 == 37);
        CHECK(v[0].omega == doctest::Approx(10.0));
        for (std::size_t k = 1; k < v.size(); ++k)
            CHECK(v[k].scale >= v[k - 1].scale);
    }
}

TEST_CASE("statistic M_n") {
    const PartitionFamily fam = mrd::enumerate_dyadic(64, 1);
    SUBCASE("zero residuals give zero") {
        const Residuals r{PixelGrid(64, 64, 0.0), mrd::NoiseModel::gaussian, 1.0};
        CHECK(mrd::statistic_mn(r, fam) == 0.0);
    }
    SUBCASE("positive homogeneity") {
        PixelGrid g = normal_grid(64, 5);
        const Residuals r1{PixelGrid(g), mrd::NoiseModel::gaussian, 1.0};
        for (int i = 0; i < 64; ++i)
            for (int j = 0; j < 64; ++j) g(i, j) *= 2.5;
        const Residuals r2{std::move(g), mrd::NoiseModel::gaussian, 1.0};
        CHECK(mrd::statistic_mn(r2, fam) ==
              doctest::Approx(2.5 * mrd::statistic_mn(r1, fam)).epsilon(1e-12));
    }
    SUBCASE("white noise lands near the noise level") {
        double mean = 0.0;
        const int sims = 50;
        for (int s = 0; s < sims; ++s) {
            const Residuals r{normal_grid(64, 1000 + s), mrd::NoiseModel::gaussian, 1.0};
            mean += mrd::statistic_mn(r, fam);
        }
        mean /= sims;
        CHECK(mean > 0.8);
        CHECK(mean < 1.2);
    }
}

TEST_CASE("confidence region membership") {
    const int n = 64;
    const PartitionFamily fam = mrd::enumerate_dyadic(n, 1);
    const PixelGrid y = normal_grid(n, 21);
    SUBCASE("the data interpolates itself") {
        CHECK(mrd::in_confidence_region(y, y, 1.0, 2.0, fam));
    }
    SUBCASE("a gross constant shift falls outside") {
        PixelGrid g = y;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) -= 10.0;
        CHECK_FALSE(mrd::in_confidence_region(g, y, 1.0, 2.0, fam));
    }
    SUBCASE("monotone in tau") {
        const PixelGrid g = normal_grid(n, 22);
        for (double tau = 0.25; tau < 32.0; tau *= 2.0) {
            if (mrd::in_confidence_region(g, y, 1.0, tau, fam)) {
                CHECK(mrd::in_confidence_region(g, y, 1.0, tau * 2.0, fam));
            }
        }
    }
}

TEST_CASE("threshold value and monotonicity") {
    const Threshold t{1.0, 2.0, 256};
    CHECK(t.value() == doctest::Approx(std::sqrt(2.0 * std::log(65536.0))).epsilon(1e-12));
    CHECK(Threshold{2.0, 2.0, 256}.value() > t.value());
    CHECK(Threshold{1.0, 3.0, 256}.value() > t.value());
    CHECK(Threshold{1.0, 2.0, 512}.value() > t.value());
    CHECK_THROWS_AS((Threshold{1.0, 2.0, 1}.value()), std::invalid_argument);
}
