#include "adapt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mrd {

namespace {

struct Quantiles {
    double min, median, max;
};

Quantiles a_quantiles(const PixelGrid& a) {
    std::vector<double> v = a.values();
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double med = v[mid];
    if (v.size() % 2 == 0) {
        const double lo = *std::max_element(v.begin(), v.begin() + mid);
        med = 0.5 * (lo + med);
    }
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    return {*mn, med, *mx};
}

void validate_adapt_inputs(const PixelGrid& y, const AdaptConfig& cfg, double delta) {
    if (!y.square())
        throw std::invalid_argument("adaptive denoising needs a square grid");
    if (y.rows() < 2)
        throw std::invalid_argument("adaptive denoising needs n >= 2");
    y.require_finite("data");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (!(cfg.lambda_min > 0.0 && cfg.lambda_min <= cfg.lambda_max && cfg.lambda_max < 1.0))
        throw std::invalid_argument("need 0 < lambda_min <= lambda_max < 1");
    if (cfg.max_outer_iters < 1)
        throw std::invalid_argument("max_outer_iters must be positive");
}

double resolve_sigma(const PixelGrid& y, const AdaptConfig& cfg) {
    if (cfg.noise == NoiseModel::poisson) return 1.0;
    return cfg.sigma > 0.0 ? cfg.sigma : estimate_sigma(y);
}

Residuals compute_residuals(const PixelGrid& y, const PixelGrid& fhat,
                            const AdaptConfig& cfg, double sigma) {
    if (cfg.noise == NoiseModel::poisson) return normalize_poisson(y, fhat);
    PixelGrid r(y.rows(), y.cols());
    for (int i = 0; i < y.rows(); ++i)
        for (int j = 0; j < y.cols(); ++j)
            r(i, j) = y(i, j) - fhat(i, j);
    return Residuals{std::move(r), NoiseModel::gaussian, sigma};
}

double clamp_lambda(double gate, double omega_abs, const AdaptConfig& cfg) {
    const double raw = omega_abs > 0.0 ? gate / omega_abs : cfg.lambda_max;
    return std::clamp(raw, cfg.lambda_min, cfg.lambda_max);
}

}  // namespace

AdaptResult denoise_local(const PixelGrid& y, LocalSolverKind solver,
                          const AdaptConfig& cfg, double delta,
                          const AdaptObserver& observer) {
    validate_adapt_inputs(y, cfg, delta);
    const int n = y.rows();
    const double a_init = cfg.a_init > 0.0 ? cfg.a_init : static_cast<double>(n);
    const double a_floor = cfg.a_floor_rel * a_init;
    if (!(a_floor > 0.0)) throw std::invalid_argument("a_floor must be positive");
    // TV keeps frozen pixels at the floor instead of zero: its data weight
    // is 1/a^2, so zero is inadmissible while the floor pins f to y anyway.
    const bool freeze_to_zero = solver == LocalSolverKind::inhom_diffusion;

    const double sigma = resolve_sigma(y, cfg);
    const Threshold threshold{sigma, delta, n};
    const double gate = threshold.value();
    const PartitionFamily family = enumerate_dyadic(n, cfg.min_side);

    AdaptResult res;
    res.sigma = sigma;
    res.delta = delta;
    res.threshold = gate;

    PixelGrid a(n, n, a_init);
    PixelGrid fhat = y;  // warm start carrier
    std::vector<char> violated(family.squares.size());
    std::vector<char> has_violating_subset(family.squares.size());

    for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
        const DiffusivityField field{PixelGrid(a)};
        fhat = solver == LocalSolverKind::inhom_diffusion
                   ? solve_inhomogeneous_diffusion(y, field, cfg.solver, &fhat)
                   : solve_tv(y, field, cfg.solver, iter == 1 ? nullptr : &fhat);

        const Residuals r = compute_residuals(y, fhat, cfg, sigma);
        const SummedAreaTable sat = build_sat(r.grid);
        const std::vector<Violation> violations = scan(sat, family, threshold);
        const double mn = statistic_mn(sat, family);

        const Quantiles q = a_quantiles(a);
        res.trace.push_back(TraceRecord{iter, static_cast<long long>(violations.size()),
                                        q.min, q.median, q.max, mn});
        res.iterations = iter;
        res.final_mn = mn;

        if (violations.empty()) {
            if (observer) {
                std::vector<Reduction> none;
                observer(AdaptIterationView{iter, &violations, &none, &fhat, &a, &a, mn});
            }
            res.clean = true;
            res.fhat = std::move(fhat);
            res.diffusivity = std::move(a);
            return res;
        }

        // Superset suppression: act on a violating square only when no
        // violating square sits strictly inside it. Children come first in
        // family order, so one forward pass propagates the flags.
        std::fill(violated.begin(), violated.end(), 0);
        std::fill(has_violating_subset.begin(), has_violating_subset.end(), 0);
        for (const Violation& v : violations) violated[v.subset_id] = 1;
        for (std::size_t s = 0; s < family.squares.size(); ++s) {
            for (int c : family.children[s]) {
                if (c < 0) continue;
                if (violated[c] || has_violating_subset[c]) {
                    has_violating_subset[s] = 1;
                    break;
                }
            }
        }

        const PixelGrid a_before = observer ? a : PixelGrid();
        RowPrefixSums residual_rows;
        bool rows_built = false;
        std::vector<Reduction> reductions;

        for (const Violation& v : violations) {
            if (has_violating_subset[v.subset_id]) continue;
            const DyadicSquare& sq = family.square(v.subset_id);

            Reduction red;
            red.square_id = sq.id;
            red.omega = v.omega;

            const Wedge* best = nullptr;
            std::vector<Wedge> wedges;
            if (cfg.use_wedges && sq.side() >= 2) {
                wedges = enumerate_wedges(sq, cfg.wedge_dict);
                if (!wedges.empty() && !rows_built) {
                    residual_rows = build_row_prefix(r.grid);
                    rows_built = true;
                }
                double best_abs = 0.0;
                for (const Wedge& w : wedges) {
                    const double omega_w = coefficient(residual_rows, w);
                    if (std::fabs(omega_w) > best_abs) {  // ties keep the lowest id
                        best_abs = std::fabs(omega_w);
                        best = &w;
                        red.omega = omega_w;
                    }
                }
                if (best_abs <= gate) {  // no wedge exceeds: fall back to the square
                    best = nullptr;
                    red.omega = v.omega;
                }
            }

            red.lambda = clamp_lambda(gate, std::fabs(red.omega), cfg);
            const int side = sq.side();
            if (best) {
                red.wedge_id = best->id;
                const std::vector<WedgeRowRun> runs = wedge_row_runs(*best);
                for (int rrow = 0; rrow < side; ++rrow) {
                    const WedgeRowRun& run = runs[rrow];
                    const int i = sq.i0 + rrow;
                    for (int j = run.j_begin; j < run.j_end; ++j) {
                        double& av = a(i, j);
                        av *= red.lambda;
                        if (av < a_floor) av = freeze_to_zero ? 0.0 : a_floor;
                    }
                }
            } else {
                for (int i = sq.i0; i < sq.i0 + side; ++i) {
                    for (int j = sq.j0; j < sq.j0 + side; ++j) {
                        double& av = a(i, j);
                        av *= red.lambda;
                        if (av < a_floor) av = freeze_to_zero ? 0.0 : a_floor;
                    }
                }
            }
            reductions.push_back(red);
        }

        if (observer)
            observer(AdaptIterationView{iter, &violations, &reductions, &fhat,
                                        &a_before, &a, mn});
    }

    res.clean = false;  // max_outer_iters reached; result flagged, not discarded
    res.fhat = std::move(fhat);
    res.diffusivity = std::move(a);
    return res;
}

GlobalResult denoise_global(const PixelGrid& y, GlobalSolverKind solver,
                            const AdaptConfig& cfg, double delta, double gamma) {
    validate_adapt_inputs(y, cfg, delta);
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("schedule factor gamma must lie in (0, 1)");

    const int n = y.rows();
    const double a_init = cfg.a_init > 0.0 ? cfg.a_init : static_cast<double>(n);
    const double a_floor = cfg.a_floor_rel * a_init;

    const double sigma = resolve_sigma(y, cfg);
    const Threshold threshold{sigma, delta, n};
    const PartitionFamily family = enumerate_dyadic(n, cfg.min_side);

    GlobalResult res;
    res.sigma = sigma;
    res.delta = delta;
    res.threshold = threshold.value();

    double a = a_init;
    int step = 0;
    while (a >= a_floor) {
        ++step;
        const DiffusivityField field = DiffusivityField::constant(n, n, a);
        const PixelGrid fhat =
            solver == GlobalSolverKind::hom_diffusion
                ? solve_inhomogeneous_diffusion(y, field, cfg.solver)
                : solve_tv(y, field, cfg.solver);
        const Residuals r = compute_residuals(y, fhat, cfg, sigma);
        const SummedAreaTable sat = build_sat(r.grid);
        const std::vector<Violation> violations = scan(sat, family, threshold);
        const double mn = statistic_mn(sat, family);
        res.trace.push_back(
            GlobalTraceRecord{step, a, static_cast<long long>(violations.size()), mn});
        res.steps = step;
        if (violations.empty()) {
            res.fhat = fhat;
            res.a_star = a;
            res.clean = true;
            res.final_mn = mn;
            return res;
        }
        a *= gamma;
    }

    // Even the floor violates: fall back to the interpolant, whose zero
    // residuals satisfy the criterion trivially.
    res.fhat = y;
    res.a_star = 0.0;
    res.clean = true;
    res.interpolant_fallback = true;
    res.final_mn = 0.0;
    res.trace.push_back(GlobalTraceRecord{++res.steps, 0.0, 0, 0.0});
    return res;
}

std::string format_trace(const std::vector<TraceRecord>& trace) {
    std::ostringstream os;
    os.precision(10);
    os << "# iter violations a_min a_median a_max m_n\n";
    for (const TraceRecord& t : trace)
        os << t.iteration << ' ' << t.violations << ' ' << t.a_min << ' '
           << t.a_median << ' ' << t.a_max << ' ' << t.m_n << '\n';
    return os.str();
}

std::string format_trace(const std::vector<GlobalTraceRecord>& trace) {
    std::ostringstream os;
    os.precision(10);
    os << "# step a violations m_n\n";
    for (const GlobalTraceRecord& t : trace)
        os << t.step << ' ' << t.a << ' ' << t.violations << ' ' << t.m_n << '\n';
    return os.str();
}

}  // namespace mrd
