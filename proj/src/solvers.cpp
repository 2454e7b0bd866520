#include "solvers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mrd {

DiffusivityField::DiffusivityField(PixelGrid a) : a_(std::move(a)) {
    a_.require_finite("diffusivity");
    for (double v : a_.values())
        if (v < 0.0) throw std::invalid_argument("diffusivity must be nonnegative");
}

DiffusivityField DiffusivityField::constant(int rows, int cols, double a) {
    return DiffusivityField(PixelGrid(rows, cols, a));
}

double DiffusivityField::min() const {
    double m = a_.values().front();
    for (double v : a_.values()) m = std::min(m, v);
    return m;
}

namespace {

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void require_same_shape(const PixelGrid& a, const PixelGrid& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(what) + ": shapes do not match");
}

struct GsOutcome {
    PixelGrid f;
    double rel_residual = 0.0;
    int sweeps = 0;
    bool converged = false;
};

// Residual checks share the sweep's stencil cost, so past the first few
// sweeps they run on a cadence; the stop condition is unchanged.
bool check_now(int sweep) { return sweep <= 8 || sweep % 8 == 0; }

// Row-major Gauss-Seidel for f_ij (1 + a_ij deg_ij) - a_ij sum(neighbors) = y_ij.
GsOutcome gs_diffusion(const PixelGrid& y, const PixelGrid& a, double tol,
                       int max_sweeps, PixelGrid init) {
    const int rows = y.rows(), cols = y.cols();
    GsOutcome out;
    out.f = std::move(init);
    PixelGrid& f = out.f;

    double y_norm = l2_norm(y.values());
    if (y_norm == 0.0) y_norm = 1.0;

    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                double s = 0.0;
                int deg = 0;
                if (i > 0) { s += f(i - 1, j); ++deg; }
                if (i + 1 < rows) { s += f(i + 1, j); ++deg; }
                if (j > 0) { s += f(i, j - 1); ++deg; }
                if (j + 1 < cols) { s += f(i, j + 1); ++deg; }
                const double aij = a(i, j);
                f(i, j) = (y(i, j) + aij * s) / (1.0 + aij * deg);
            }
        }
        out.sweeps = sweep;
        if (!check_now(sweep) && sweep < max_sweeps) continue;
        double res_sq = 0.0;
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                double s = 0.0;
                int deg = 0;
                if (i > 0) { s += f(i - 1, j); ++deg; }
                if (i + 1 < rows) { s += f(i + 1, j); ++deg; }
                if (j > 0) { s += f(i, j - 1); ++deg; }
                if (j + 1 < cols) { s += f(i, j + 1); ++deg; }
                const double aij = a(i, j);
                const double r = y(i, j) - (f(i, j) * (1.0 + aij * deg) - aij * s);
                res_sq += r * r;
            }
        }
        out.rel_residual = std::sqrt(res_sq) / y_norm;
        if (out.rel_residual <= tol) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

PixelGrid downsample_mean(const PixelGrid& g) {
    const int rows = g.rows() / 2, cols = g.cols() / 2;
    PixelGrid out(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            out(i, j) = 0.25 * (g(2 * i, 2 * j) + g(2 * i, 2 * j + 1) +
                                g(2 * i + 1, 2 * j) + g(2 * i + 1, 2 * j + 1));
    return out;
}

// Cell-centered bilinear refinement; coarse cell I covers fine cells
// 2I and 2I+1, so the fine center (i + 0.5) sits at coarse coordinate
// (i - 0.5) / 2.
PixelGrid upsample_bilinear(const PixelGrid& g, int rows, int cols) {
    PixelGrid out(rows, cols);
    auto split = [](int i, int limit, int& lo, double& t) {
        double u = (i - 0.5) / 2.0;
        if (u < 0.0) u = 0.0;
        if (u > limit - 1) u = limit - 1;
        lo = static_cast<int>(u);
        if (lo > limit - 2) lo = std::max(0, limit - 2);
        t = u - lo;
    };
    for (int i = 0; i < rows; ++i) {
        int i0;
        double ti;
        split(i, g.rows(), i0, ti);
        const int i1 = std::min(i0 + 1, g.rows() - 1);
        for (int j = 0; j < cols; ++j) {
            int j0;
            double tj;
            split(j, g.cols(), j0, tj);
            const int j1 = std::min(j0 + 1, g.cols() - 1);
            out(i, j) = (1 - ti) * ((1 - tj) * g(i0, j0) + tj * g(i0, j1)) +
                        ti * ((1 - tj) * g(i1, j0) + tj * g(i1, j1));
        }
    }
    return out;
}

double mean_of(const PixelGrid& g) {
    double s = 0.0;
    for (double v : g.values()) s += v;
    return s / static_cast<double>(g.size());
}

// Coarse-to-fine cascade for the initial guess: halving the grid quarters
// the equivalent diffusivity, and the coarse solutions carry the smooth
// content that plain sweeps are slow to build from scratch.
PixelGrid cascade_initial_guess(const PixelGrid& y, const PixelGrid& a,
                                double tol, int max_sweeps) {
    if (y.rows() != y.cols() || y.rows() <= 32 || y.rows() % 2 != 0 ||
        mean_of(a) <= 2.0)
        return y;
    const PixelGrid y2 = downsample_mean(y);
    PixelGrid a2 = downsample_mean(a);
    for (int i = 0; i < a2.rows(); ++i)
        for (int j = 0; j < a2.cols(); ++j)
            a2(i, j) *= 0.25;
    PixelGrid init2 = cascade_initial_guess(y2, a2, tol, max_sweeps);
    GsOutcome coarse = gs_diffusion(y2, a2, tol, max_sweeps, std::move(init2));
    return upsample_bilinear(coarse.f, y.rows(), y.cols());
}

}  // namespace

PixelGrid solve_inhomogeneous_diffusion(const PixelGrid& y, const DiffusivityField& a,
                                        const SolverConfig& cfg,
                                        const PixelGrid* warm_start) {
    y.require_finite("diffusion data");
    require_same_shape(y, a.grid(), "diffusion solve");
    if (!(cfg.tol > 0.0 && cfg.tol < 1.0) || cfg.max_sweeps < 1)
        throw std::invalid_argument("bad solver config");
    if (warm_start) {
        warm_start->require_finite("warm start");
        require_same_shape(y, *warm_start, "warm start");
    }

    PixelGrid init = warm_start
                         ? *warm_start
                         : cascade_initial_guess(y, a.grid(), std::min(cfg.tol * 10.0, 1e-4),
                                                 cfg.max_sweeps);
    GsOutcome out = gs_diffusion(y, a.grid(), cfg.tol, cfg.max_sweeps, std::move(init));
    if (!out.converged) {
        std::ostringstream msg;
        msg << "diffusion solve did not reach tol " << cfg.tol << " within "
            << cfg.max_sweeps << " sweeps (residual " << out.rel_residual << ")";
        throw SolveFailure(msg.str(), out.rel_residual);
    }
    return std::move(out.f);
}

PixelGrid solve_homogeneous_diffusion(const PixelGrid& y, double a,
                                      const SolverConfig& cfg,
                                      const PixelGrid* warm_start) {
    if (!(a >= 0.0)) throw std::invalid_argument("diffusivity must be nonnegative");
    return solve_inhomogeneous_diffusion(
        y, DiffusivityField::constant(y.rows(), y.cols(), a), cfg, warm_start);
}

double tv_beta_for(const PixelGrid& y, const SolverConfig& cfg) {
    if (cfg.tv_beta > 0.0) return cfg.tv_beta;
    const auto [lo, hi] = std::minmax_element(y.values().begin(), y.values().end());
    const double range = *hi - *lo;
    return range > 0.0 ? 1e-3 * range : 1e-3;
}

namespace {

// Edge weights of the lagged linear system: w_ij weights the forward
// differences rooted at (i, j).
PixelGrid lagged_weights(const PixelGrid& g, double beta) {
    const int rows = g.rows(), cols = g.cols();
    PixelGrid w(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const double gx = (j + 1 < cols) ? g(i, j + 1) - g(i, j) : 0.0;
            const double gy = (i + 1 < rows) ? g(i + 1, j) - g(i, j) : 0.0;
            w(i, j) = 0.5 / std::sqrt(gx * gx + gy * gy + beta * beta);
        }
    }
    return w;
}

// Stationarity of the lagged objective, scaled by a^2 per row so the
// right-hand side is y itself:
//   g_ij (1 + a^2 sum w_e) - a^2 sum w_e g_nb = y_ij
// with down/right edges weighted by w_ij and up/left by the neighbor's w.
GsOutcome gs_weighted(const PixelGrid& y, const PixelGrid& a2, const PixelGrid& w,
                      double tol, int max_sweeps, PixelGrid init) {
    const int rows = y.rows(), cols = y.cols();
    GsOutcome out;
    out.f = std::move(init);
    PixelGrid& g = out.f;

    double y_norm = l2_norm(y.values());
    if (y_norm == 0.0) y_norm = 1.0;

    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                double ws = 0.0, wg = 0.0;
                if (i > 0) { ws += w(i - 1, j); wg += w(i - 1, j) * g(i - 1, j); }
                if (j > 0) { ws += w(i, j - 1); wg += w(i, j - 1) * g(i, j - 1); }
                if (i + 1 < rows) { ws += w(i, j); wg += w(i, j) * g(i + 1, j); }
                if (j + 1 < cols) { ws += w(i, j); wg += w(i, j) * g(i, j + 1); }
                const double c = a2(i, j);
                g(i, j) = (y(i, j) + c * wg) / (1.0 + c * ws);
            }
        }
        out.sweeps = sweep;
        if (!check_now(sweep) && sweep < max_sweeps) continue;
        double res_sq = 0.0;
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                double ws = 0.0, wg = 0.0;
                if (i > 0) { ws += w(i - 1, j); wg += w(i - 1, j) * g(i - 1, j); }
                if (j > 0) { ws += w(i, j - 1); wg += w(i, j - 1) * g(i, j - 1); }
                if (i + 1 < rows) { ws += w(i, j); wg += w(i, j) * g(i + 1, j); }
                if (j + 1 < cols) { ws += w(i, j); wg += w(i, j) * g(i, j + 1); }
                const double c = a2(i, j);
                const double r = y(i, j) - (g(i, j) * (1.0 + c * ws) - c * wg);
                res_sq += r * r;
            }
        }
        out.rel_residual = std::sqrt(res_sq) / y_norm;
        if (out.rel_residual <= tol) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

}  // namespace

double smoothed_tv_objective(const PixelGrid& g, const PixelGrid& y,
                             const DiffusivityField& a, double beta) {
    require_same_shape(g, y, "tv objective");
    const int rows = g.rows(), cols = g.cols();
    double data = 0.0, penalty = 0.0;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const double d = (g(i, j) - y(i, j)) / a.grid()(i, j);
            data += d * d;
            const double gx = (j + 1 < cols) ? g(i, j + 1) - g(i, j) : 0.0;
            const double gy = (i + 1 < rows) ? g(i + 1, j) - g(i, j) : 0.0;
            penalty += std::sqrt(gx * gx + gy * gy + beta * beta);
        }
    }
    return data + penalty;
}

PixelGrid solve_tv(const PixelGrid& y, const DiffusivityField& a,
                   const SolverConfig& cfg, const PixelGrid* warm_start,
                   std::vector<double>* objective_trace) {
    y.require_finite("tv data");
    require_same_shape(y, a.grid(), "tv solve");
    if (!(a.min() > 0.0))
        throw std::invalid_argument("tv solve needs strictly positive diffusivity");
    if (!(cfg.tol > 0.0 && cfg.tol < 1.0) || cfg.max_sweeps < 1 || cfg.tv_outer_iters < 1)
        throw std::invalid_argument("bad solver config");

    const double beta = tv_beta_for(y, cfg);
    const int rows = y.rows(), cols = y.cols();

    PixelGrid a2(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            a2(i, j) = a.grid()(i, j) * a.grid()(i, j);

    PixelGrid g = warm_start ? *warm_start : y;
    if (!warm_start) {
        // Seed the first outer iteration with a diffusion solve of matching
        // average stiffness; plain sweeps are slow to reach the heavily
        // smoothed regime from the data itself.
        const PixelGrid w0 = lagged_weights(y, beta);
        PixelGrid a_eff(rows, cols);
        const double wbar = mean_of(w0);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                a_eff(i, j) = a2(i, j) * wbar;
        g = cascade_initial_guess(y, a_eff, std::min(cfg.tol * 10.0, 1e-4), cfg.max_sweeps);
    }

    double obj_prev = smoothed_tv_objective(g, y, a, beta);
    if (objective_trace) objective_trace->push_back(obj_prev);

    for (int outer = 0; outer < cfg.tv_outer_iters; ++outer) {
        const PixelGrid w = lagged_weights(g, beta);
        GsOutcome out = gs_weighted(y, a2, w, cfg.tol, cfg.max_sweeps, std::move(g));
        if (!out.converged) {
            std::ostringstream msg;
            msg << "tv inner solve did not reach tol " << cfg.tol << " within "
                << cfg.max_sweeps << " sweeps (residual " << out.rel_residual << ")";
            throw SolveFailure(msg.str(), out.rel_residual);
        }
        g = std::move(out.f);
        const double obj = smoothed_tv_objective(g, y, a, beta);
        if (objective_trace) objective_trace->push_back(obj);
        if (obj_prev - obj < cfg.tol * std::max(1.0, std::fabs(obj_prev))) break;
        obj_prev = obj;
    }
    return g;
}

}  // namespace mrd
