#include <stdexcept>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "mrc.hpp"
#include "noise_sim.hpp"
#include "oracles.hpp"

using mrd::PhantomSpec;
using mrd::PixelGrid;

TEST_CASE("phantom rendering") {
    SUBCASE("empty feature list renders zeros") {
        PhantomSpec spec;
        spec.n = 16;
        const PixelGrid g = mrd::render_phantom(spec);
        for (double v : g.values()) CHECK(v == 0.0);
    }
    SUBCASE("a centered disc covers about pi r^2 pixels") {
        const int n = 256;
        PhantomSpec spec;
        spec.n = n;
        mrd::PhantomFeature disc;
        disc.kind = mrd::PhantomFeature::Kind::disc;
        disc.x0 = 0.5;
        disc.y0 = 0.5;
        disc.radius = 0.25;
        disc.value = 5.0;
        spec.features.push_back(disc);
        const PixelGrid g = mrd::render_phantom(spec);
        long long inside = 0;
        for (double v : g.values())
            if (v == 5.0) ++inside;
        const double expect = std::numbers::pi * (n / 4.0) * (n / 4.0);
        CHECK(std::fabs(inside - expect) <= 4.0 * std::sqrt(double(n)));
    }
    SUBCASE("rendering is deterministic") {
        const PhantomSpec spec = mrd::default_phantom(64);
        CHECK(mrd::render_phantom(spec).values() == mrd::render_phantom(spec).values());
    }
    SUBCASE("default phantom stays within its range") {
        const PixelGrid g = mrd::render_phantom(mrd::default_phantom(128));
        for (double v : g.values()) {
            CHECK(v >= 0.0);
            CHECK(v <= 5.0);
        }
    }
}

TEST_CASE("phantom spec text format") {
    std::istringstream in(
        "# a comment\n"
        "range 0 5\n"
        "background 1\n"
        "disc 0.5 0.5 0.2 4\n"
        "ramp 0.0 0.8 0.5 1.0 0 2\n"
        "valley 0.6 0.6 0.9 0.9 0.1 2 0\n"
        "dots 0.1 0.1 0.1 0.03 0.8 5\n");
    const PhantomSpec spec = mrd::parse_phantom_spec(in, 64);
    CHECK(spec.features.size() == 5);
    const PixelGrid g = mrd::render_phantom(spec);
    CHECK(g(32, 32) == 4.0);  // inside the disc

    std::istringstream bad("disc 0.5 0.5\n");
    CHECK_THROWS(mrd::parse_phantom_spec(bad, 64));
    std::istringstream unknown("blob 1 2 3\n");
    CHECK_THROWS(mrd::parse_phantom_spec(unknown, 64));
}

TEST_CASE("gaussian noise") {
    const PixelGrid f = mrd::render_phantom(mrd::default_phantom(64));
    SUBCASE("sigma zero is the identity") {
        CHECK(mrd::add_gaussian_noise(f, 0.0, 9).values() == f.values());
    }
    SUBCASE("seeded reproducibility, and different seeds differ") {
        const PixelGrid y1 = mrd::add_gaussian_noise(f, 1.0, 10);
        const PixelGrid y2 = mrd::add_gaussian_noise(f, 1.0, 10);
        const PixelGrid y3 = mrd::add_gaussian_noise(f, 1.0, 11);
        CHECK(y1.values() == y2.values());
        CHECK(y1.values() != y3.values());
    }
    SUBCASE("the noise mean is near zero") {
        const int n = 256;
        const PixelGrid zero(n, n, 0.0);
        const PixelGrid y = mrd::add_gaussian_noise(zero, 1.0, 12);
        double mean = 0.0;
        for (double v : y.values()) mean += v;
        mean /= static_cast<double>(y.size());
        CHECK(std::fabs(mean) <= 4.0 / n);
    }
    SUBCASE("negative sigma rejected") {
        CHECK_THROWS_AS(mrd::add_gaussian_noise(f, -1.0, 1), std::invalid_argument);
    }
}

TEST_CASE("poisson noise") {
    SUBCASE("moments at intensity 100") {
        const int n = 256;
        const PixelGrid f(n, n, 100.0);
        const PixelGrid y = mrd::add_poisson_noise(f, 13);
        double mean = 0.0;
        for (double v : y.values()) mean += v;
        mean /= static_cast<double>(y.size());
        CHECK(mean > 99.0);
        CHECK(mean < 101.0);
        const double var = oracle::sample_variance(y.values());
        CHECK(var > 90.0);
        CHECK(var < 110.0);
    }
    SUBCASE("seeded reproducibility") {
        const PixelGrid f(32, 32, 60.0);
        CHECK(mrd::add_poisson_noise(f, 14).values() ==
              mrd::add_poisson_noise(f, 14).values());
    }
    SUBCASE("tiny intensities give mostly zeros") {
        const PixelGrid f(64, 64, 0.01);
        const PixelGrid y = mrd::add_poisson_noise(f, 15);
        long long zeros = 0;
        for (double v : y.values())
            if (v == 0.0) ++zeros;
        CHECK(zeros >= static_cast<long long>(0.95 * y.size()));
    }
    SUBCASE("nonpositive intensities rejected") {
        CHECK_THROWS_AS(mrd::add_poisson_noise(PixelGrid(4, 4, 0.0), 1),
                        std::invalid_argument);
    }
}

TEST_CASE("noise and sigma estimation agree end to end") {
    // Smooth signal so the double differences see noise only.
    const int n = 256;
    PixelGrid f(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            f(i, j) = 2.5 + 2.0 * std::sin(2.0 * std::numbers::pi * i / n) *
                                std::sin(2.0 * std::numbers::pi * j / n);
    const PixelGrid y = mrd::add_gaussian_noise(f, 1.0, 16);
    CHECK(mrd::estimate_sigma(y) == doctest::Approx(1.0).epsilon(0.05));
}
