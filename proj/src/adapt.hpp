#pragma once

#include <functional>
#include <vector>

#include "mrc.hpp"
#include "solvers.hpp"

namespace mrd {

enum class LocalSolverKind { inhom_diffusion, tv };
enum class GlobalSolverKind { hom_diffusion, tv };

struct AdaptConfig {
    double a_init = 0.0;          // <= 0: grid side n
    double lambda_min = 0.5;
    double lambda_max = 0.9;
    double a_floor_rel = 1e-8;    // floor = a_floor_rel * a_init
    int max_outer_iters = 300;
    bool use_wedges = true;
    WedgeDict wedge_dict{};
    int min_side = 1;
    NoiseModel noise = NoiseModel::gaussian;
    double sigma = 0.0;           // <= 0: estimate from the data (Gaussian)
    SolverConfig solver{};
};

struct TraceRecord {
    int iteration = 0;
    long long violations = 0;
    double a_min = 0, a_median = 0, a_max = 0;
    double m_n = 0;
};

/// One diffusivity reduction: on the whole square (wedge_id < 0) or on a
/// wedge of it; `omega` is the coefficient that triggered it and `lambda`
/// the factor applied.
struct Reduction {
    int square_id = -1;
    int wedge_id = -1;
    double omega = 0.0;
    double lambda = 1.0;
};

/// Snapshot handed to the observer once per iteration, after the scan and
/// (when violations exist) after the reductions were applied. Pointers are
/// valid only during the call.
struct AdaptIterationView {
    int iteration = 0;
    const std::vector<Violation>* violations = nullptr;
    const std::vector<Reduction>* reductions = nullptr;
    const PixelGrid* fhat = nullptr;
    const PixelGrid* a_before = nullptr;
    const PixelGrid* a_after = nullptr;
    double m_n = 0.0;
};
using AdaptObserver = std::function<void(const AdaptIterationView&)>;

struct AdaptResult {
    PixelGrid fhat;
    PixelGrid diffusivity;
    std::vector<TraceRecord> trace;
    bool clean = false;           // final scan had no violations
    int iterations = 0;
    double sigma = 0.0;
    double delta = 0.0;
    double threshold = 0.0;
    double final_mn = 0.0;
};

/// The local adaptation loop: start from a large constant diffusivity,
/// solve, scan the residuals over all dyadic squares, and wherever the
/// criterion fails on a square none of whose subsets failed, shrink the
/// diffusivity there — on the strongest wedge of the square when one also
/// fails, otherwise on the whole square. Returns the first estimate whose
/// scan is clean. Reduction factors are clamp(threshold/|omega|,
/// lambda_min, lambda_max); pixels falling below the floor freeze (at zero
/// for diffusion, at the floor for TV, whose data weight is 1/a^2).
AdaptResult denoise_local(const PixelGrid& y, LocalSolverKind solver,
                          const AdaptConfig& cfg, double delta,
                          const AdaptObserver& observer = {});

struct GlobalTraceRecord {
    int step = 0;
    double a = 0.0;
    long long violations = 0;
    double m_n = 0.0;
};

struct GlobalResult {
    PixelGrid fhat;
    double a_star = 0.0;
    std::vector<GlobalTraceRecord> trace;
    bool clean = false;
    bool interpolant_fallback = false;  // schedule exhausted; fhat = y, a = 0
    int steps = 0;
    double sigma = 0.0;
    double delta = 0.0;
    double threshold = 0.0;
    double final_mn = 0.0;
};

/// Global choice: geometric schedule a <- gamma * a from a_init, accepting
/// the first (largest) a whose residuals pass the criterion everywhere.
/// When even the floor violates, returns the interpolant f = y with a = 0,
/// which satisfies the criterion trivially.
GlobalResult denoise_global(const PixelGrid& y, GlobalSolverKind solver,
                            const AdaptConfig& cfg, double delta,
                            double gamma = 0.8);

/// Line-delimited trace (iteration, violations, a quantiles, M_n).
std::string format_trace(const std::vector<TraceRecord>& trace);
std::string format_trace(const std::vector<GlobalTraceRecord>& trace);

}  // namespace mrd
