/* mrdenoise -- image denoising with a data-driven, locally adaptive
 * smoothing parameter chosen by a statistical multiresolution criterion.
 *
 * C interface of the shared library. All objects are opaque handles owned
 * by the library; every fallible call returns an mrd_status, with a
 * thread-local detail message available from mrd_last_error().
 */
#ifndef MRDENOISE_H
#define MRDENOISE_H

#include <stdint.h>

#ifdef _WIN32
#define MRD_API __declspec(dllexport)
#else
#define MRD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mrd_status {
    MRD_OK = 0,
    MRD_ERR_INVALID_ARGUMENT = 1,
    MRD_ERR_IO = 2,
    MRD_ERR_NOT_CONVERGED = 3,
    MRD_ERR_NUMERIC = 4,
    MRD_ERR_INTERNAL = 5
} mrd_status;

typedef struct mrd_image mrd_image;
typedef struct mrd_calibration mrd_calibration;
typedef struct mrd_result mrd_result;

MRD_API const char* mrd_status_name(mrd_status s);
/* Message of the last failing call on this thread; empty string if none. */
MRD_API const char* mrd_last_error(void);

/* ---- images (dense row-major double grids) ---- */

MRD_API mrd_status mrd_image_create(int rows, int cols, const double* row_major,
                                    mrd_image** out);
MRD_API void mrd_image_destroy(mrd_image* img);
MRD_API int mrd_image_rows(const mrd_image* img);
MRD_API int mrd_image_cols(const mrd_image* img);
MRD_API const double* mrd_image_data(const mrd_image* img);

/* .pgm/.pnm read as binary PGM, anything else as float CSV. */
MRD_API mrd_status mrd_image_read(const char* path, mrd_image** out);
MRD_API mrd_status mrd_image_write_csv(const mrd_image* img, const char* path);
/* maxval 255 or 65535; float grids are affinely mapped onto the range and
 * the mapping recorded in sidecar_path (pass NULL to skip the sidecar). */
MRD_API mrd_status mrd_image_write_pgm(const mrd_image* img, const char* path,
                                       int maxval, const char* sidecar_path);
/* out = scale * img + offset */
MRD_API mrd_status mrd_image_affine(const mrd_image* img, double scale,
                                    double offset, mrd_image** out);

/* ---- phantoms and noise ---- */

/* spec_path NULL renders the built-in test image (values in [0,5]). */
MRD_API mrd_status mrd_render_phantom(int n, const char* spec_path, mrd_image** out);
MRD_API mrd_status mrd_add_gaussian_noise(const mrd_image* f, double sigma,
                                          uint64_t seed, mrd_image** out);
MRD_API mrd_status mrd_add_poisson_noise(const mrd_image* f, uint64_t seed,
                                         mrd_image** out);

/* ---- noise level ---- */

/* Robust estimate from the median of absolute double differences. */
MRD_API mrd_status mrd_estimate_sigma(const mrd_image* y, double* out_sigma);

/* ---- threshold calibration ---- */

MRD_API mrd_status mrd_calibrate(int n, int min_side, double alpha, int sims,
                                 uint64_t seed, mrd_calibration** out);
MRD_API mrd_status mrd_calibration_save(const mrd_calibration* cal, const char* path);
MRD_API mrd_status mrd_calibration_load(const char* path, mrd_calibration** out);
MRD_API double mrd_calibration_delta(const mrd_calibration* cal);
MRD_API double mrd_calibration_alpha(const mrd_calibration* cal);
MRD_API int mrd_calibration_n(const mrd_calibration* cal);
MRD_API int mrd_calibration_min_side(const mrd_calibration* cal);
MRD_API void mrd_calibration_destroy(mrd_calibration* cal);

/* ---- denoising ---- */

typedef enum mrd_method {
    MRD_METHOD_HOMDIFF = 0,   /* homogeneous diffusion, global parameter */
    MRD_METHOD_INHOMDIFF = 1, /* inhomogeneous diffusion, per-pixel parameter */
    MRD_METHOD_TV_GLOBAL = 2,
    MRD_METHOD_TV_LOCAL = 3
} mrd_method;

typedef enum mrd_noise { MRD_NOISE_GAUSSIAN = 0, MRD_NOISE_POISSON = 1 } mrd_noise;

typedef struct mrd_denoise_options {
    int method;          /* mrd_method */
    int noise;           /* mrd_noise */
    double sigma;        /* <= 0: estimate from the data (Gaussian only) */
    double delta;        /* > 0 overrides the calibration handle */
    int min_side;        /* smallest dyadic square side */
    int use_wedges;
    double a_init;       /* <= 0: grid side */
    double lambda_min;
    double lambda_max;
    int max_iters;
    double gamma;        /* global schedule factor in (0,1) */
    double tol;          /* solver tolerance */
    int max_sweeps;
    double tv_beta;      /* <= 0: 1e-3 * data range */
    int tv_outer_iters;
} mrd_denoise_options;

MRD_API void mrd_denoise_options_init(mrd_denoise_options* opts);

/* Runs the configured method. Exactly one threshold source applies: either
 * opts->delta > 0 or a calibration handle (matching the grid side). */
MRD_API mrd_status mrd_denoise(const mrd_image* y, const mrd_denoise_options* opts,
                               const mrd_calibration* cal, mrd_result** out);

MRD_API const mrd_image* mrd_result_fhat(const mrd_result* r);
MRD_API const mrd_image* mrd_result_diffusivity(const mrd_result* r);
/* Residuals the final scan saw: y - fhat, Poisson-normalized in Poisson mode. */
MRD_API const mrd_image* mrd_result_residual(const mrd_result* r);
MRD_API int mrd_result_iterations(const mrd_result* r);
MRD_API int mrd_result_clean(const mrd_result* r);
MRD_API double mrd_result_sigma(const mrd_result* r);
MRD_API double mrd_result_delta(const mrd_result* r);
MRD_API double mrd_result_threshold(const mrd_result* r);
MRD_API double mrd_result_final_mn(const mrd_result* r);
/* Accepted global parameter; NaN for local methods. */
MRD_API double mrd_result_global_a(const mrd_result* r);
MRD_API const char* mrd_result_trace(const mrd_result* r);
MRD_API void mrd_result_destroy(mrd_result* r);

/* ---- extreme-value verification ---- */

typedef struct mrd_gumbel_report {
    int n;
    int dim;
    long long family_size;
    int sims;
    double a_n;
    double b_n;
    double sup_distance; /* Kolmogorov distance to exp(-e^{-tau}) */
} mrd_gumbel_report;

/* sample_out, when non-NULL, receives `sims` normalized maxima. */
MRD_API mrd_status mrd_verify_gumbel(int n, int dim, int sims, uint64_t seed,
                                     mrd_gumbel_report* out, double* sample_out);

#ifdef __cplusplus
}
#endif

#endif /* MRDENOISE_H */
