#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace mrd {

/// Per-pixel regularization strength a >= 0. Zero pixels reproduce the data
/// exactly and act as information barriers for the diffusion solver.
class DiffusivityField {
public:
    explicit DiffusivityField(PixelGrid a);
    static DiffusivityField constant(int rows, int cols, double a);

    const PixelGrid& grid() const { return a_; }
    double min() const;

private:
    PixelGrid a_;
};

struct SolverConfig {
    double tol = 1e-5;       // relative l2 residual; also the relative
                             // objective-decrease stop for TV outer iterations
    int max_sweeps = 50000;
    double tv_beta = 0.0;    // <= 0: 1e-3 times the data range
    int tv_outer_iters = 20;
};

/// Thrown when Gauss-Seidel fails to reach tol within max_sweeps; carries
/// the relative residual that was achieved.
struct SolveFailure : std::runtime_error {
    SolveFailure(const std::string& msg, double achieved)
        : std::runtime_error(msg), residual(achieved) {}
    double residual;
};

/// Solves f - a .* (lap f) = y with the 5-point Laplacian and reflecting
/// boundary (missing neighbors drop out of the stencil), by Gauss-Seidel
/// sweeps in fixed row-major order until the relative l2 residual of the
/// system is <= cfg.tol. The system is strictly row-diagonally dominant
/// (diagonal 1 + deg*a against off-diagonal sum deg*a), so the sweeps
/// converge. `warm_start` seeds the iteration; without one, a coarse-grid
/// cascade builds the initial guess when the diffusivity is large.
PixelGrid solve_inhomogeneous_diffusion(const PixelGrid& y, const DiffusivityField& a,
                                        const SolverConfig& cfg,
                                        const PixelGrid* warm_start = nullptr);

PixelGrid solve_homogeneous_diffusion(const PixelGrid& y, double a,
                                      const SolverConfig& cfg,
                                      const PixelGrid* warm_start = nullptr);

/// Smoothed total-variation objective sum((g-y)/a)^2 + sum sqrt(|grad g|^2 + beta^2)
/// with forward differences.
double smoothed_tv_objective(const PixelGrid& g, const PixelGrid& y,
                             const DiffusivityField& a, double beta);

double tv_beta_for(const PixelGrid& y, const SolverConfig& cfg);

/// Approximately minimizes the smoothed TV objective by the lagged
/// diffusivity fixed point: each outer iteration freezes edge weights
/// 1/(2 sqrt(|grad g|^2 + beta^2)) and solves the resulting linear system
/// with the same Gauss-Seidel contract as the diffusion solver. Stops after
/// cfg.tv_outer_iters or when the objective decreases by < cfg.tol
/// relatively. Requires a > 0 everywhere (the data weight is 1/a^2).
/// `objective_trace`, when given, receives the objective after the initial
/// guess and after every outer iteration.
PixelGrid solve_tv(const PixelGrid& y, const DiffusivityField& a,
                   const SolverConfig& cfg, const PixelGrid* warm_start = nullptr,
                   std::vector<double>* objective_trace = nullptr);

}  // namespace mrd
