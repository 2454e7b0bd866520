#include <stdexcept>
#include <cmath>
#include <set>

#include "adapt.hpp"
#include "calibrate.hpp"
#include "doctest.h"
#include "noise_sim.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using mrd::AdaptConfig;
using mrd::AdaptIterationView;
using mrd::AdaptResult;
using mrd::GlobalResult;
using mrd::PixelGrid;

namespace {

PixelGrid white_noise(int n, uint64_t seed) {
    PixelGrid g(n, n);
    auto gen = mrd::rng::engine(seed);
    mrd::rng::fill_standard_normal(gen, g.data(), g.size());
    return g;
}

AdaptConfig base_config() {
    AdaptConfig cfg;
    cfg.solver.tol = 1e-7;
    cfg.solver.max_sweeps = 100000;
    return cfg;
}

}  // namespace

TEST_CASE("local loop accepts calibrated white noise at once, mostly") {
    const int n = 64;
    const double delta = mrd::calibrate_delta({n, 1}, 0.05, 300, 2024).delta;
    AdaptConfig cfg = base_config();
    cfg.sigma = 1.0;
    int immediate = 0;
    const int runs = 20;
    for (int s = 0; s < runs; ++s) {
        const AdaptResult res =
            mrd::denoise_local(white_noise(n, 5000 + s),
                               mrd::LocalSolverKind::inhom_diffusion, cfg, delta);
        CHECK(res.clean);
        if (res.iterations == 1) {
            ++immediate;
            for (double v : res.diffusivity.values()) CHECK(v == doctest::Approx(64.0));
        }
    }
    CHECK(immediate >= 16);  // target 95%, wide slack for 20 runs
}

TEST_CASE("noiseless data with a forced tiny sigma ends with a clean scan and tight fit") {
    const int n = 32;
    const PixelGrid f = mrd::render_phantom(mrd::default_phantom(n));
    AdaptConfig cfg = base_config();
    cfg.sigma = 1e-6;
    cfg.max_outer_iters = 200;
    const double delta = 2.0;
    const AdaptResult res =
        mrd::denoise_local(f, mrd::LocalSolverKind::inhom_diffusion, cfg, delta);
    CHECK(res.clean);
    // Every pixel is a subset of the scan family, so a clean scan bounds the
    // sup-norm of the residuals by the threshold.
    double sup = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            sup = std::max(sup, std::fabs(f(i, j) - res.fhat(i, j)));
    CHECK(sup <= res.threshold + 1e-12);
}

TEST_CASE("diffusivity is pointwise nonincreasing and the loop stops at first clean scan") {
    const int n = 32;
    const PixelGrid truth = mrd::render_phantom(mrd::default_phantom(n));
    const PixelGrid y = mrd::add_gaussian_noise(truth, 1.0, 31);
    AdaptConfig cfg = base_config();
    cfg.sigma = 1.0;

    std::vector<PixelGrid> a_history;
    std::vector<std::size_t> violation_counts;
    PixelGrid final_fhat_seen;
    const mrd::AdaptObserver obs = [&](const AdaptIterationView& view) {
        a_history.push_back(*view.a_after);
        violation_counts.push_back(view.violations->size());
        final_fhat_seen = *view.fhat;
    };
    const AdaptResult res =
        mrd::denoise_local(y, mrd::LocalSolverKind::inhom_diffusion, cfg, 2.0, obs);
    REQUIRE(res.clean);
    REQUIRE(!a_history.empty());

    for (std::size_t k = 1; k < a_history.size(); ++k)
        for (std::size_t p = 0; p < a_history[k].size(); ++p)
            CHECK(a_history[k].values()[p] <= a_history[k - 1].values()[p] + 1e-15);

    // Only the last observed iteration is clean, and its estimate is returned.
    for (std::size_t k = 0; k + 1 < violation_counts.size(); ++k)
        CHECK(violation_counts[k] > 0);
    CHECK(violation_counts.back() == 0);
    CHECK(res.fhat.values() == final_fhat_seen.values());
    CHECK(static_cast<int>(violation_counts.size()) == res.iterations);
}

TEST_CASE("superset suppression acts on exactly the minimal violating squares") {
    const int n = 32;
    const PixelGrid truth = mrd::render_phantom(mrd::default_phantom(n));
    const PixelGrid y = mrd::add_gaussian_noise(truth, 1.0, 88);

    AdaptConfig cfg = base_config();
    cfg.sigma = 1.0;
    cfg.use_wedges = false;

    const mrd::PartitionFamily fam = mrd::enumerate_dyadic(n, 1);
    auto strict_subset = [&](const mrd::DyadicSquare& inner,
                             const mrd::DyadicSquare& outer) {
        return inner.level < outer.level && inner.i0 >= outer.i0 &&
               inner.j0 >= outer.j0 &&
               inner.i0 + inner.side() <= outer.i0 + outer.side() &&
               inner.j0 + inner.side() <= outer.j0 + outer.side();
    };

    int iterations_with_violations = 0;
    const mrd::AdaptObserver obs = [&](const AdaptIterationView& view) {
        if (view.violations->empty()) return;
        ++iterations_with_violations;
        std::set<int> acted;
        for (const mrd::Reduction& r : *view.reductions) acted.insert(r.square_id);
        // A square is acted on iff it violates and no violating square sits
        // strictly inside it.
        for (const mrd::Violation& v : *view.violations) {
            bool has_subset = false;
            for (const mrd::Violation& w : *view.violations)
                if (strict_subset(fam.squares[w.subset_id], fam.squares[v.subset_id])) {
                    has_subset = true;
                    break;
                }
            CHECK(acted.count(v.subset_id) == (has_subset ? 0u : 1u));
        }
        for (int id : acted) {
            bool violates = false;
            for (const mrd::Violation& v : *view.violations)
                if (v.subset_id == id) violates = true;
            CHECK(violates);
        }
    };
    const AdaptResult res =
        mrd::denoise_local(y, mrd::LocalSolverKind::inhom_diffusion, cfg, 2.0, obs);
    CHECK(res.clean);
    CHECK(iterations_with_violations > 0);
}

TEST_CASE("wedge refinement reduces on a wedge when one violates") {
    const int n = 16;
    // A half-plane edge through the middle of the grid: the 16x16 root and
    // its 8x8 children straddle structure their wedges capture better.
    PixelGrid y(n, n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (j >= i) y(i, j) = 30.0;

    AdaptConfig cfg = base_config();
    cfg.sigma = 1.0;
    cfg.use_wedges = true;
    cfg.max_outer_iters = 1;
    cfg.min_side = 8;  // keep only scales whose wedges matter here

    bool saw_wedge = false;
    const mrd::AdaptObserver obs = [&](const AdaptIterationView& view) {
        for (const mrd::Reduction& r : *view.reductions)
            if (r.wedge_id >= 0) saw_wedge = true;
    };
    mrd::denoise_local(y, mrd::LocalSolverKind::inhom_diffusion, cfg, 2.0, obs);
    CHECK(saw_wedge);
}

TEST_CASE("results are deterministic") {
    const int n = 32;
    const PixelGrid y = mrd::add_gaussian_noise(
        mrd::render_phantom(mrd::default_phantom(n)), 1.0, 404);
    AdaptConfig cfg = base_config();
    cfg.sigma = 1.0;
    const AdaptResult r1 =
        mrd::denoise_local(y, mrd::LocalSolverKind::inhom_diffusion, cfg, 2.0);
    const AdaptResult r2 =
        mrd::denoise_local(y, mrd::LocalSolverKind::inhom_diffusion, cfg, 2.0);
    CHECK(r1.fhat.values() == r2.fhat.values());
    CHECK(r1.diffusivity.values() == r2.diffusivity.values());
    CHECK(r1.iterations == r2.iterations);
}

TEST_CASE("local loop flags but returns when the iteration cap is hit") {
    const int n = 16;
    const PixelGrid y = mrd::add_gaussian_noise(
        mrd::render_phantom(mrd::default_phantom(n)), 1.0, 11);
    AdaptConfig cfg = base_config();
    cfg.sigma = 0.01;  // absurdly tight threshold forces many iterations
    cfg.max_outer_iters = 2;
    const AdaptResult res =
        mrd::denoise_local(y, mrd::LocalSolverKind::inhom_diffusion, cfg, 2.0);
    CHECK_FALSE(res.clean);
    CHECK(res.iterations == 2);
    CHECK(res.fhat.rows() == n);
}

TEST_CASE("non-square inputs are rejected") {
    AdaptConfig cfg = base_config();
    CHECK_THROWS_AS(mrd::denoise_local(PixelGrid(8, 9, 0.0),
                                       mrd::LocalSolverKind::inhom_diffusion, cfg, 2.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(mrd::denoise_global(PixelGrid(8, 9, 0.0),
                                        mrd::GlobalSolverKind::hom_diffusion, cfg, 2.0),
                    std::invalid_argument);
}

TEST_CASE("poisson local smoke run stays near unit residual variance") {
    const int n = 64;
    PixelGrid truth = mrd::render_phantom(mrd::default_phantom(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) truth(i, j) = 50.0 + 10.0 * truth(i, j);
    const PixelGrid y = mrd::add_poisson_noise(truth, 77);

    AdaptConfig cfg = base_config();
    cfg.noise = mrd::NoiseModel::poisson;
    const double delta = mrd::calibrate_delta({n, 1}, 0.05, 300, 2024).delta;
    const AdaptResult res =
        mrd::denoise_local(y, mrd::LocalSolverKind::inhom_diffusion, cfg, delta);
    CHECK(res.clean);
    CHECK(res.sigma == 1.0);

    std::vector<double> r;
    r.reserve(y.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            r.push_back((y(i, j) - res.fhat(i, j)) / std::sqrt(res.fhat(i, j)));
    CHECK(oracle::sample_std(r) > 0.85);
    CHECK(oracle::sample_std(r) < 1.15);
}

TEST_CASE("global choice on white noise accepts the initial diffusivity") {
    const int n = 64;
    const double delta = mrd::calibrate_delta({n, 1}, 0.05, 300, 2024).delta;
    AdaptConfig cfg = base_config();
    cfg.sigma = 1.0;
    int immediate = 0;
    for (int s = 0; s < 10; ++s) {
        const GlobalResult res = mrd::denoise_global(
            white_noise(n, 7000 + s), mrd::GlobalSolverKind::hom_diffusion, cfg, delta);
        CHECK(res.clean);
        if (res.steps == 1) {
            ++immediate;
            CHECK(res.a_star == doctest::Approx(64.0));
        }
    }
    CHECK(immediate >= 7);
}

TEST_CASE("global choice with an oversized sigma accepts immediately") {
    const int n = 32;
    PixelGrid step(n, n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = n / 2; j < n; ++j) step(i, j) = 1.0;
    AdaptConfig cfg = base_config();
    cfg.sigma = 50.0;  // dwarfs the unit step
    const GlobalResult res =
        mrd::denoise_global(step, mrd::GlobalSolverKind::hom_diffusion, cfg, 2.0);
    CHECK(res.clean);
    CHECK(res.steps == 1);
    CHECK(res.a_star == doctest::Approx(32.0));
}

TEST_CASE("global schedule is geometric and the accepted step is the first clean one") {
    const int n = 32;
    const PixelGrid y = mrd::add_gaussian_noise(
        mrd::render_phantom(mrd::default_phantom(n)), 1.0, 51);
    AdaptConfig cfg = base_config();
    cfg.sigma = 1.0;
    const double gamma = 0.7;
    const GlobalResult res =
        mrd::denoise_global(y, mrd::GlobalSolverKind::hom_diffusion, cfg, 2.0, gamma);
    REQUIRE(res.clean);
    REQUIRE(!res.trace.empty());
    for (std::size_t k = 0; k < res.trace.size(); ++k) {
        CHECK(res.trace[k].a ==
              doctest::Approx(32.0 * std::pow(gamma, double(k))).epsilon(1e-12));
        if (k + 1 < res.trace.size()) CHECK(res.trace[k].violations > 0);
    }
    CHECK(res.trace.back().violations == 0);
    CHECK(res.a_star == doctest::Approx(res.trace.back().a));
}

TEST_CASE("trace formatting") {
    std::vector<mrd::TraceRecord> tr{{1, 5, 0.0, 1.0, 2.0, 0.9}};
    const std::string s = mrd::format_trace(tr);
    CHECK(s.find("# iter violations a_min a_median a_max m_n\n") == 0);
    CHECK(s.find("1 5 0 1 2 0.9\n") != std::string::npos);
}
