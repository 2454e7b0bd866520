// mrd -- command-line front end of the mrdenoise shared library.
//
// Subcommands: denoise | calibrate | verify-gumbel | simulate | rowcut |
// estimate-sigma. Exit codes: 0 success, 2 usage/input error, 3 numeric
// failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mrdenoise.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

int exit_code_for(mrd_status s) {
    switch (s) {
        case MRD_OK: return 0;
        case MRD_ERR_INVALID_ARGUMENT:
        case MRD_ERR_IO: return kExitUsage;
        default: return kExitNumeric;
    }
}

int fail(mrd_status s) {
    std::fprintf(stderr, "error: %s (%s)\n", mrd_last_error(), mrd_status_name(s));
    return exit_code_for(s);
}

int fail_usage(const std::string& msg) {
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    return kExitUsage;
}

struct ImageHandle {
    mrd_image* p = nullptr;
    ~ImageHandle() { mrd_image_destroy(p); }
};

struct CalibrationHandle {
    mrd_calibration* p = nullptr;
    ~CalibrationHandle() { mrd_calibration_destroy(p); }
};

struct ResultHandle {
    mrd_result* p = nullptr;
    ~ResultHandle() { mrd_result_destroy(p); }
};

bool has_suffix(const std::string& s, const char* suffix) {
    const std::string suf(suffix);
    return s.size() >= suf.size() &&
           s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

int write_image(const mrd_image* img, const std::string& path) {
    const mrd_status s = has_suffix(path, ".pgm")
                             ? mrd_image_write_pgm(img, path.c_str(), 255,
                                                   (path + ".map.txt").c_str())
                             : mrd_image_write_csv(img, path.c_str());
    return s == MRD_OK ? 0 : fail(s);
}

int write_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) return fail_usage("cannot write " + path);
        out << content;
        if (!out.flush()) return fail_usage("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        return fail_usage("cannot move file into place: " + path);
    return 0;
}

struct DenoiseArgs {
    std::string input, out_prefix;
    std::string method = "inhomdiff";
    std::string noise = "gaussian";
    double sigma = 0.0;
    double delta = 0.0;
    std::string calibration_file;
    double alpha = 0.0;
    int sims = 1000;
    int min_side = 1;
    bool no_wedges = false;
    uint64_t seed = 1;
    double a_init = 0.0;
    double lambda_min = 0.5, lambda_max = 0.9;
    int max_iters = 300;
    double gamma = 0.8;
    double tol = 1e-5;
    int max_sweeps = 50000;
    double tv_beta = 0.0;
    int tv_outer_iters = 20;
};

int run_denoise(const DenoiseArgs& args) {
    int sources = 0;
    if (args.delta > 0.0) ++sources;
    if (!args.calibration_file.empty()) ++sources;
    if (args.alpha > 0.0) ++sources;
    if (sources != 1)
        return fail_usage(
            "exactly one of --delta, --calibration, --alpha must select the threshold");

    ImageHandle y;
    if (mrd_status s = mrd_image_read(args.input.c_str(), &y.p)) return fail(s);

    CalibrationHandle cal;
    if (!args.calibration_file.empty()) {
        if (mrd_status s = mrd_calibration_load(args.calibration_file.c_str(), &cal.p))
            return fail(s);
    } else if (args.alpha > 0.0) {
        std::fprintf(stderr, "calibrating delta (n=%d, alpha=%g, sims=%d)...\n",
                     mrd_image_rows(y.p), args.alpha, args.sims);
        if (mrd_status s = mrd_calibrate(mrd_image_rows(y.p), args.min_side, args.alpha,
                                         args.sims, args.seed, &cal.p))
            return fail(s);
    }

    mrd_denoise_options opts;
    mrd_denoise_options_init(&opts);
    if (args.method == "homdiff") opts.method = MRD_METHOD_HOMDIFF;
    else if (args.method == "inhomdiff") opts.method = MRD_METHOD_INHOMDIFF;
    else if (args.method == "tv-global") opts.method = MRD_METHOD_TV_GLOBAL;
    else if (args.method == "tv-local") opts.method = MRD_METHOD_TV_LOCAL;
    else return fail_usage("unknown method: " + args.method);
    if (args.noise == "gaussian") opts.noise = MRD_NOISE_GAUSSIAN;
    else if (args.noise == "poisson") opts.noise = MRD_NOISE_POISSON;
    else return fail_usage("unknown noise model: " + args.noise);
    opts.sigma = args.sigma;
    opts.delta = args.delta;
    opts.min_side = args.min_side;
    opts.use_wedges = args.no_wedges ? 0 : 1;
    opts.a_init = args.a_init;
    opts.lambda_min = args.lambda_min;
    opts.lambda_max = args.lambda_max;
    opts.max_iters = args.max_iters;
    opts.gamma = args.gamma;
    opts.tol = args.tol;
    opts.max_sweeps = args.max_sweeps;
    opts.tv_beta = args.tv_beta;
    opts.tv_outer_iters = args.tv_outer_iters;

    ResultHandle res;
    if (mrd_status s = mrd_denoise(y.p, &opts, cal.p, &res.p)) return fail(s);

    const std::string& pre = args.out_prefix;
    if (int rc = write_image(mrd_result_fhat(res.p), pre + ".fhat.csv")) return rc;
    if (int rc = write_image(mrd_result_fhat(res.p), pre + ".fhat.pgm")) return rc;
    if (int rc = write_image(mrd_result_diffusivity(res.p), pre + ".a.csv")) return rc;
    if (int rc = write_image(mrd_result_diffusivity(res.p), pre + ".a.pgm")) return rc;
    if (int rc = write_image(mrd_result_residual(res.p), pre + ".residual.csv")) return rc;
    if (int rc = write_text(pre + ".trace.txt", mrd_result_trace(res.p))) return rc;

    const bool global_method =
        opts.method == MRD_METHOD_HOMDIFF || opts.method == MRD_METHOD_TV_GLOBAL;
    std::ostringstream sum;
    sum.precision(17);
    sum << "method " << args.method << "\n";
    sum << "noise " << args.noise << "\n";
    sum << "n " << mrd_image_rows(y.p) << "\n";
    sum << "sigma " << mrd_result_sigma(res.p) << "\n";
    sum << "delta " << mrd_result_delta(res.p) << "\n";
    sum << "threshold " << mrd_result_threshold(res.p) << "\n";
    sum << "iterations " << mrd_result_iterations(res.p) << "\n";
    sum << "clean " << mrd_result_clean(res.p) << "\n";
    sum << "final_mn " << mrd_result_final_mn(res.p) << "\n";
    if (global_method) {
        sum << "a_star " << mrd_result_global_a(res.p) << "\n";
    } else {
        const mrd_image* a = mrd_result_diffusivity(res.p);
        const double* d = mrd_image_data(a);
        std::vector<double> v(d, d + static_cast<std::size_t>(mrd_image_rows(a)) *
                                        mrd_image_cols(a));
        std::sort(v.begin(), v.end());
        const double med = v.size() % 2 ? v[v.size() / 2]
                                        : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
        sum << "a_min " << v.front() << "\n";
        sum << "a_median " << med << "\n";
        sum << "a_max " << v.back() << "\n";
    }
    if (int rc = write_text(pre + ".summary.txt", sum.str())) return rc;

    std::printf("%s: %s after %d iteration(s), sigma=%.6g delta=%.6g M_n=%.6g\n",
                args.method.c_str(), mrd_result_clean(res.p) ? "clean" : "NOT clean",
                mrd_result_iterations(res.p), mrd_result_sigma(res.p),
                mrd_result_delta(res.p), mrd_result_final_mn(res.p));
    return mrd_result_clean(res.p) ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"image denoising with a multiresolution-calibrated smoothing parameter"};
    app.require_subcommand(1);

    // denoise
    DenoiseArgs dn;
    CLI::App* denoise = app.add_subcommand("denoise", "denoise an image (csv or pgm)");
    denoise->add_option("-i,--input", dn.input, "input image")->required();
    denoise->add_option("-o,--out-prefix", dn.out_prefix, "output path prefix")->required();
    denoise->add_option("--method", dn.method,
                        "homdiff | inhomdiff | tv-global | tv-local");
    denoise->add_option("--noise", dn.noise, "gaussian | poisson");
    denoise->add_option("--sigma", dn.sigma, "noise level (<= 0: estimate)");
    denoise->add_option("--delta", dn.delta, "criterion constant, overrides calibration");
    denoise->add_option("--calibration", dn.calibration_file, "calibration file");
    denoise->add_option("--alpha", dn.alpha, "significance level; calibrates on the fly");
    denoise->add_option("--sims", dn.sims, "simulations for on-the-fly calibration");
    denoise->add_option("--min-side", dn.min_side, "smallest dyadic square side");
    denoise->add_flag("--no-wedges", dn.no_wedges, "disable wedge refinement");
    denoise->add_option("--seed", dn.seed, "seed for calibration simulations");
    denoise->add_option("--a-init", dn.a_init, "initial diffusivity (<= 0: grid side)");
    denoise->add_option("--lambda-min", dn.lambda_min, "smallest reduction factor");
    denoise->add_option("--lambda-max", dn.lambda_max, "largest reduction factor");
    denoise->add_option("--max-iters", dn.max_iters, "outer iteration cap");
    denoise->add_option("--gamma", dn.gamma, "global schedule factor");
    denoise->add_option("--tol", dn.tol, "solver tolerance");
    denoise->add_option("--max-sweeps", dn.max_sweeps, "Gauss-Seidel sweep cap");
    denoise->add_option("--tv-beta", dn.tv_beta, "TV smoothing (<= 0: 1e-3 * range)");
    denoise->add_option("--tv-outer-iters", dn.tv_outer_iters, "TV outer iterations");

    // calibrate
    struct {
        int n = 256, min_side = 1, sims = 1000;
        double alpha = 0.05;
        uint64_t seed = 1;
        std::string out;
    } cb;
    CLI::App* calibrate = app.add_subcommand("calibrate", "Monte-Carlo threshold calibration");
    calibrate->add_option("--n", cb.n, "grid side")->required();
    calibrate->add_option("--alpha", cb.alpha, "significance level");
    calibrate->add_option("--sims", cb.sims, "number of simulations");
    calibrate->add_option("--seed", cb.seed, "seed");
    calibrate->add_option("--min-side", cb.min_side, "smallest dyadic square side");
    calibrate->add_option("-o,--out", cb.out, "calibration file")->required();

    // verify-gumbel
    struct {
        int n = 256, dim = 2, sims = 1000;
        uint64_t seed = 1;
        std::string out, dump_sample;
    } vg;
    CLI::App* verify = app.add_subcommand("verify-gumbel",
                                          "empirical check of the extreme-value limit");
    verify->add_option("--n", vg.n, "grid side")->required();
    verify->add_option("--dim", vg.dim, "dimension, 1 or 2");
    verify->add_option("--sims", vg.sims, "number of simulations");
    verify->add_option("--seed", vg.seed, "seed");
    verify->add_option("-o,--out", vg.out, "report file")->required();
    verify->add_option("--dump-sample", vg.dump_sample, "write normalized maxima (csv)");

    // simulate
    struct {
        int n = 256;
        std::string spec, noise = "gaussian";
        double sigma = 1.0;
        uint64_t seed = 1;
        double remap_lo = 0.0, remap_hi = 0.0;
        bool remap = false;
        std::string out_truth, out_noisy;
    } sim;
    CLI::App* simulate = app.add_subcommand("simulate", "render a phantom and add noise");
    simulate->add_option("--n", sim.n, "grid side");
    simulate->add_option("--spec", sim.spec, "phantom spec file (default: built-in)");
    simulate->add_option("--noise", sim.noise, "gaussian | poisson | none");
    simulate->add_option("--sigma", sim.sigma, "gaussian noise level");
    simulate->add_option("--seed", sim.seed, "seed");
    auto* remap_opt = simulate->add_option("--remap", [&sim](CLI::results_t vals) {
        sim.remap = true;
        sim.remap_lo = std::stod(vals.at(0));
        sim.remap_hi = std::stod(vals.at(1));
        return true;
    }, "affinely map rendered values onto [LO, HI]");
    remap_opt->type_name("LO HI")->type_size(2);
    simulate->add_option("--out-truth", sim.out_truth, "noise-free image path");
    simulate->add_option("--out-noisy", sim.out_noisy, "noisy image path");

    // rowcut
    struct {
        int row = 0;
        std::string out;
        std::vector<std::string> inputs;
    } rc;
    CLI::App* rowcut = app.add_subcommand("rowcut", "extract one row of each input as csv columns");
    rowcut->add_option("--row", rc.row, "row index (0-based)")->required();
    rowcut->add_option("-o,--out", rc.out, "output csv")->required();
    rowcut->add_option("inputs", rc.inputs, "input images")->required()->expected(-1);

    // estimate-sigma
    struct {
        std::string input;
    } es;
    CLI::App* estsig = app.add_subcommand("estimate-sigma", "print the robust noise estimate");
    estsig->add_option("-i,--input", es.input, "input image")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (app.got_subcommand(denoise)) return run_denoise(dn);

    if (app.got_subcommand(calibrate)) {
        CalibrationHandle cal;
        if (mrd_status s = mrd_calibrate(cb.n, cb.min_side, cb.alpha, cb.sims, cb.seed,
                                         &cal.p))
            return fail(s);
        if (mrd_status s = mrd_calibration_save(cal.p, cb.out.c_str())) return fail(s);
        std::printf("delta %.17g (n=%d alpha=%g sims=%d)\n", mrd_calibration_delta(cal.p),
                    cb.n, cb.alpha, cb.sims);
        return 0;
    }

    if (app.got_subcommand(verify)) {
        mrd_gumbel_report rep;
        std::vector<double> sample(static_cast<std::size_t>(std::max(vg.sims, 1)));
        if (mrd_status s = mrd_verify_gumbel(vg.n, vg.dim, vg.sims, vg.seed, &rep,
                                             sample.data()))
            return fail(s);
        std::ostringstream os;
        os.precision(17);
        os << "n " << rep.n << "\ndim " << rep.dim << "\nfamily_size " << rep.family_size
           << "\nsims " << rep.sims << "\nseed " << vg.seed << "\na_n " << rep.a_n
           << "\nb_n " << rep.b_n << "\nsup_distance " << rep.sup_distance << "\n";
        if (int code = write_text(vg.out, os.str())) return code;
        if (!vg.dump_sample.empty()) {
            std::ostringstream ds;
            ds.precision(17);
            for (double v : sample) ds << v << "\n";
            if (int code = write_text(vg.dump_sample, ds.str())) return code;
        }
        std::printf("sup distance to the Gumbel cdf: %.6g (n=%d, d=%d, sims=%d)\n",
                    rep.sup_distance, rep.n, rep.dim, rep.sims);
        return 0;
    }

    if (app.got_subcommand(simulate)) {
        if (sim.out_truth.empty() && sim.out_noisy.empty())
            return fail_usage("nothing to write; pass --out-truth and/or --out-noisy");
        ImageHandle truth;
        if (mrd_status s = mrd_render_phantom(
                sim.n, sim.spec.empty() ? nullptr : sim.spec.c_str(), &truth.p))
            return fail(s);
        if (sim.remap) {
            // rendered range is [0, 5] unless the phantom file overrides it
            const double* d = mrd_image_data(truth.p);
            const std::size_t m = static_cast<std::size_t>(mrd_image_rows(truth.p)) *
                                  mrd_image_cols(truth.p);
            const auto [lo_it, hi_it] = std::minmax_element(d, d + m);
            const double span = *hi_it - *lo_it;
            const double scale = span > 0.0 ? (sim.remap_hi - sim.remap_lo) / span : 0.0;
            ImageHandle mapped;
            if (mrd_status s = mrd_image_affine(truth.p, scale,
                                                sim.remap_lo - scale * *lo_it, &mapped.p))
                return fail(s);
            std::swap(truth.p, mapped.p);
        }
        if (!sim.out_truth.empty())
            if (int code = write_image(truth.p, sim.out_truth)) return code;
        if (!sim.out_noisy.empty()) {
            ImageHandle noisy;
            if (sim.noise == "gaussian") {
                if (mrd_status s = mrd_add_gaussian_noise(truth.p, sim.sigma, sim.seed,
                                                          &noisy.p))
                    return fail(s);
            } else if (sim.noise == "poisson") {
                if (mrd_status s = mrd_add_poisson_noise(truth.p, sim.seed, &noisy.p))
                    return fail(s);
            } else if (sim.noise == "none") {
                if (mrd_status s = mrd_image_affine(truth.p, 1.0, 0.0, &noisy.p))
                    return fail(s);
            } else {
                return fail_usage("unknown noise model: " + sim.noise);
            }
            if (int code = write_image(noisy.p, sim.out_noisy)) return code;
        }
        return 0;
    }

    if (app.got_subcommand(rowcut)) {
        std::vector<ImageHandle> images(rc.inputs.size());
        int cols = -1;
        for (std::size_t k = 0; k < rc.inputs.size(); ++k) {
            if (mrd_status s = mrd_image_read(rc.inputs[k].c_str(), &images[k].p))
                return fail(s);
            if (rc.row < 0 || rc.row >= mrd_image_rows(images[k].p))
                return fail_usage("row out of range for " + rc.inputs[k]);
            if (cols < 0) cols = mrd_image_cols(images[k].p);
            else if (cols != mrd_image_cols(images[k].p))
                return fail_usage("inputs have differing widths");
        }
        std::ostringstream os;
        os.precision(17);
        for (int j = 0; j < cols; ++j) {
            os << j;
            for (auto& img : images)
                os << ',' << mrd_image_data(img.p)[static_cast<std::size_t>(rc.row) *
                                                       cols + j];
            os << '\n';
        }
        return write_text(rc.out, os.str());
    }

    if (app.got_subcommand(estsig)) {
        ImageHandle y;
        if (mrd_status s = mrd_image_read(es.input.c_str(), &y.p)) return fail(s);
        double sigma = 0.0;
        if (mrd_status s = mrd_estimate_sigma(y.p, &sigma)) return fail(s);
        std::printf("%.17g\n", sigma);
        return 0;
    }

    return fail_usage("no subcommand given");
}
