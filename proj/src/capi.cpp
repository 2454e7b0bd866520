#include "mrdenoise.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <string>

#include "adapt.hpp"
#include "calibrate.hpp"
#include "image_io.hpp"
#include "mrc.hpp"
#include "noise_sim.hpp"
#include "solvers.hpp"

struct mrd_image {
    mrd::PixelGrid grid;
};

struct mrd_calibration {
    mrd::Calibration cal;
};

struct mrd_result {
    mrd_image fhat;
    mrd_image diffusivity;
    mrd_image residual;
    std::string trace;
    int iterations = 0;
    bool clean = false;
    double sigma = 0, delta = 0, threshold = 0, final_mn = 0;
    double global_a = std::nan("");
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename Fn>
mrd_status guarded(Fn&& fn) {
    try {
        fn();
        return MRD_OK;
    } catch (const mrd::SolveFailure& e) {
        set_error(e.what());
        return MRD_ERR_NOT_CONVERGED;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return MRD_ERR_INVALID_ARGUMENT;
    } catch (const std::out_of_range& e) {
        set_error(e.what());
        return MRD_ERR_INVALID_ARGUMENT;
    } catch (const std::runtime_error& e) {
        set_error(e.what());
        return MRD_ERR_IO;
    } catch (const std::exception& e) {
        set_error(e.what());
        return MRD_ERR_INTERNAL;
    } catch (...) {
        set_error("unknown error");
        return MRD_ERR_INTERNAL;
    }
}

mrd_status require(bool ok, const char* msg) {
    if (ok) return MRD_OK;
    set_error(msg);
    return MRD_ERR_INVALID_ARGUMENT;
}

mrd::PixelGrid residual_for(const mrd::PixelGrid& y, const mrd::PixelGrid& fhat,
                            mrd_noise noise) {
    if (noise == MRD_NOISE_POISSON)
        return mrd::normalize_poisson(y, fhat).grid;
    mrd::PixelGrid r(y.rows(), y.cols());
    for (int i = 0; i < y.rows(); ++i)
        for (int j = 0; j < y.cols(); ++j) r(i, j) = y(i, j) - fhat(i, j);
    return r;
}

}  // namespace

extern "C" {

const char* mrd_status_name(mrd_status s) {
    switch (s) {
        case MRD_OK: return "ok";
        case MRD_ERR_INVALID_ARGUMENT: return "invalid argument";
        case MRD_ERR_IO: return "io error";
        case MRD_ERR_NOT_CONVERGED: return "solver did not converge";
        case MRD_ERR_NUMERIC: return "numeric failure";
        case MRD_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* mrd_last_error(void) { return g_last_error.c_str(); }

mrd_status mrd_image_create(int rows, int cols, const double* row_major,
                            mrd_image** out) {
    if (mrd_status s = require(out != nullptr, "null output handle")) return s;
    return guarded([&] {
        auto img = std::make_unique<mrd_image>();
        if (row_major) {
            img->grid = mrd::PixelGrid(
                rows, cols,
                std::vector<double>(row_major,
                                    row_major + static_cast<std::size_t>(rows) * cols));
        } else {
            img->grid = mrd::PixelGrid(rows, cols, 0.0);
        }
        *out = img.release();
    });
}

void mrd_image_destroy(mrd_image* img) { delete img; }

int mrd_image_rows(const mrd_image* img) { return img ? img->grid.rows() : 0; }
int mrd_image_cols(const mrd_image* img) { return img ? img->grid.cols() : 0; }

const double* mrd_image_data(const mrd_image* img) {
    return img ? img->grid.data() : nullptr;
}

mrd_status mrd_image_read(const char* path, mrd_image** out) {
    if (mrd_status s = require(out && path, "null argument")) return s;
    return guarded([&] {
        auto img = std::make_unique<mrd_image>();
        img->grid = mrd::read_image(path);
        *out = img.release();
    });
}

mrd_status mrd_image_write_csv(const mrd_image* img, const char* path) {
    if (mrd_status s = require(img && path, "null argument")) return s;
    return guarded([&] { mrd::write_csv(img->grid, path); });
}

mrd_status mrd_image_write_pgm(const mrd_image* img, const char* path, int maxval,
                               const char* sidecar_path) {
    if (mrd_status s = require(img && path, "null argument")) return s;
    return guarded([&] {
        mrd::write_pgm(img->grid, path, maxval, sidecar_path ? sidecar_path : "");
    });
}

mrd_status mrd_image_affine(const mrd_image* img, double scale, double offset,
                            mrd_image** out) {
    if (mrd_status s = require(img && out, "null argument")) return s;
    return guarded([&] {
        auto res = std::make_unique<mrd_image>();
        res->grid = img->grid;
        for (int i = 0; i < res->grid.rows(); ++i)
            for (int j = 0; j < res->grid.cols(); ++j)
                res->grid(i, j) = scale * res->grid(i, j) + offset;
        *out = res.release();
    });
}

mrd_status mrd_render_phantom(int n, const char* spec_path, mrd_image** out) {
    if (mrd_status s = require(out != nullptr, "null output handle")) return s;
    return guarded([&] {
        const mrd::PhantomSpec spec =
            spec_path ? mrd::load_phantom_spec(spec_path, n) : mrd::default_phantom(n);
        auto img = std::make_unique<mrd_image>();
        img->grid = mrd::render_phantom(spec);
        *out = img.release();
    });
}

mrd_status mrd_add_gaussian_noise(const mrd_image* f, double sigma, uint64_t seed,
                                  mrd_image** out) {
    if (mrd_status s = require(f && out, "null argument")) return s;
    return guarded([&] {
        auto img = std::make_unique<mrd_image>();
        img->grid = mrd::add_gaussian_noise(f->grid, sigma, seed);
        *out = img.release();
    });
}

mrd_status mrd_add_poisson_noise(const mrd_image* f, uint64_t seed, mrd_image** out) {
    if (mrd_status s = require(f && out, "null argument")) return s;
    return guarded([&] {
        auto img = std::make_unique<mrd_image>();
        img->grid = mrd::add_poisson_noise(f->grid, seed);
        *out = img.release();
    });
}

mrd_status mrd_estimate_sigma(const mrd_image* y, double* out_sigma) {
    if (mrd_status s = require(y && out_sigma, "null argument")) return s;
    return guarded([&] { *out_sigma = mrd::estimate_sigma(y->grid); });
}

mrd_status mrd_calibrate(int n, int min_side, double alpha, int sims, uint64_t seed,
                         mrd_calibration** out) {
    if (mrd_status s = require(out != nullptr, "null output handle")) return s;
    return guarded([&] {
        auto cal = std::make_unique<mrd_calibration>();
        cal->cal = mrd::calibrate_delta(mrd::FamilySpec{n, min_side}, alpha, sims, seed);
        *out = cal.release();
    });
}

mrd_status mrd_calibration_save(const mrd_calibration* cal, const char* path) {
    if (mrd_status s = require(cal && path, "null argument")) return s;
    return guarded([&] { mrd::save_calibration(cal->cal, path); });
}

mrd_status mrd_calibration_load(const char* path, mrd_calibration** out) {
    if (mrd_status s = require(path && out, "null argument")) return s;
    return guarded([&] {
        auto cal = std::make_unique<mrd_calibration>();
        cal->cal = mrd::load_calibration(path);
        *out = cal.release();
    });
}

double mrd_calibration_delta(const mrd_calibration* cal) {
    return cal ? cal->cal.delta : std::nan("");
}
double mrd_calibration_alpha(const mrd_calibration* cal) {
    return cal ? cal->cal.alpha : std::nan("");
}
int mrd_calibration_n(const mrd_calibration* cal) { return cal ? cal->cal.n : 0; }
int mrd_calibration_min_side(const mrd_calibration* cal) {
    return cal ? cal->cal.min_side : 0;
}
void mrd_calibration_destroy(mrd_calibration* cal) { delete cal; }

void mrd_denoise_options_init(mrd_denoise_options* opts) {
    if (!opts) return;
    opts->method = MRD_METHOD_INHOMDIFF;
    opts->noise = MRD_NOISE_GAUSSIAN;
    opts->sigma = 0.0;
    opts->delta = 0.0;
    opts->min_side = 1;
    opts->use_wedges = 1;
    opts->a_init = 0.0;
    opts->lambda_min = 0.5;
    opts->lambda_max = 0.9;
    opts->max_iters = 300;
    opts->gamma = 0.8;
    opts->tol = 1e-5;
    opts->max_sweeps = 50000;
    opts->tv_beta = 0.0;
    opts->tv_outer_iters = 20;
}

mrd_status mrd_denoise(const mrd_image* y, const mrd_denoise_options* opts,
                       const mrd_calibration* cal, mrd_result** out) {
    if (mrd_status s = require(y && opts && out, "null argument")) return s;
    if (mrd_status s = require(opts->delta > 0.0 || cal != nullptr,
                               "need a delta override or a calibration handle"))
        return s;
    return guarded([&] {
        if (cal && opts->delta <= 0.0 && cal->cal.n != y->grid.rows())
            throw std::invalid_argument("calibration grid side does not match image");
        const double delta = opts->delta > 0.0 ? opts->delta : cal->cal.delta;

        mrd::AdaptConfig cfg;
        cfg.a_init = opts->a_init;
        cfg.lambda_min = opts->lambda_min;
        cfg.lambda_max = opts->lambda_max;
        cfg.max_outer_iters = opts->max_iters;
        cfg.use_wedges = opts->use_wedges != 0;
        cfg.min_side = opts->min_side;
        cfg.noise = opts->noise == MRD_NOISE_POISSON ? mrd::NoiseModel::poisson
                                                     : mrd::NoiseModel::gaussian;
        cfg.sigma = opts->sigma;
        cfg.solver.tol = opts->tol;
        cfg.solver.max_sweeps = opts->max_sweeps;
        cfg.solver.tv_beta = opts->tv_beta;
        cfg.solver.tv_outer_iters = opts->tv_outer_iters;

        auto res = std::make_unique<mrd_result>();
        const auto noise = static_cast<mrd_noise>(opts->noise);

        switch (opts->method) {
            case MRD_METHOD_INHOMDIFF:
            case MRD_METHOD_TV_LOCAL: {
                const auto kind = opts->method == MRD_METHOD_INHOMDIFF
                                      ? mrd::LocalSolverKind::inhom_diffusion
                                      : mrd::LocalSolverKind::tv;
                mrd::AdaptResult r = mrd::denoise_local(y->grid, kind, cfg, delta);
                res->residual.grid = residual_for(y->grid, r.fhat, noise);
                res->fhat.grid = std::move(r.fhat);
                res->diffusivity.grid = std::move(r.diffusivity);
                res->trace = mrd::format_trace(r.trace);
                res->iterations = r.iterations;
                res->clean = r.clean;
                res->sigma = r.sigma;
                res->delta = r.delta;
                res->threshold = r.threshold;
                res->final_mn = r.final_mn;
                break;
            }
            case MRD_METHOD_HOMDIFF:
            case MRD_METHOD_TV_GLOBAL: {
                const auto kind = opts->method == MRD_METHOD_HOMDIFF
                                      ? mrd::GlobalSolverKind::hom_diffusion
                                      : mrd::GlobalSolverKind::tv;
                mrd::GlobalResult r =
                    mrd::denoise_global(y->grid, kind, cfg, delta, opts->gamma);
                res->residual.grid = residual_for(y->grid, r.fhat, noise);
                res->fhat.grid = std::move(r.fhat);
                res->diffusivity.grid =
                    mrd::PixelGrid(y->grid.rows(), y->grid.cols(), r.a_star);
                res->trace = mrd::format_trace(r.trace);
                res->iterations = r.steps;
                res->clean = r.clean;
                res->sigma = r.sigma;
                res->delta = r.delta;
                res->threshold = r.threshold;
                res->final_mn = r.final_mn;
                res->global_a = r.a_star;
                break;
            }
            default:
                throw std::invalid_argument("unknown method");
        }
        *out = res.release();
    });
}

const mrd_image* mrd_result_fhat(const mrd_result* r) { return r ? &r->fhat : nullptr; }
const mrd_image* mrd_result_diffusivity(const mrd_result* r) {
    return r ? &r->diffusivity : nullptr;
}
const mrd_image* mrd_result_residual(const mrd_result* r) {
    return r ? &r->residual : nullptr;
}
int mrd_result_iterations(const mrd_result* r) { return r ? r->iterations : 0; }
int mrd_result_clean(const mrd_result* r) { return r && r->clean ? 1 : 0; }
double mrd_result_sigma(const mrd_result* r) { return r ? r->sigma : std::nan(""); }
double mrd_result_delta(const mrd_result* r) { return r ? r->delta : std::nan(""); }
double mrd_result_threshold(const mrd_result* r) {
    return r ? r->threshold : std::nan("");
}
double mrd_result_final_mn(const mrd_result* r) {
    return r ? r->final_mn : std::nan("");
}
double mrd_result_global_a(const mrd_result* r) {
    return r ? r->global_a : std::nan("");
}
const char* mrd_result_trace(const mrd_result* r) {
    return r ? r->trace.c_str() : "";
}
void mrd_result_destroy(mrd_result* r) { delete r; }

mrd_status mrd_verify_gumbel(int n, int dim, int sims, uint64_t seed,
                             mrd_gumbel_report* out, double* sample_out) {
    if (mrd_status s = require(out != nullptr, "null output report")) return s;
    return guarded([&] {
        const mrd::GumbelReport rep = mrd::verify_gumbel(n, dim, sims, seed);
        out->n = rep.n;
        out->dim = rep.dim;
        out->family_size = rep.family_size;
        out->sims = rep.sims;
        out->a_n = rep.a_n;
        out->b_n = rep.b_n;
        out->sup_distance = rep.sup_distance;
        if (sample_out)
            std::memcpy(sample_out, rep.sample.data(), rep.sample.size() * sizeof(double));
    });
}

}  // extern "C"
