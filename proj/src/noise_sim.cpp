#include "noise_sim.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rng.hpp"

namespace mrd {

PhantomSpec default_phantom(int n) {
    PhantomSpec spec;
    spec.n = n;
    spec.lo = 0.0;
    spec.hi = 5.0;

    // Features sit on both sides of the background level so that bright and
    // dark regions smooth against it in rough balance.
    PhantomFeature bg;
    bg.kind = PhantomFeature::Kind::background;
    bg.value = 2.0;
    spec.features.push_back(bg);

    PhantomFeature disc;
    disc.kind = PhantomFeature::Kind::disc;
    disc.x0 = 0.30;
    disc.y0 = 0.30;
    disc.radius = 0.20;
    disc.value = 4.5;
    spec.features.push_back(disc);

    PhantomFeature valley;
    valley.kind = PhantomFeature::Kind::valley;
    valley.x0 = 0.06;
    valley.y0 = 0.60;
    valley.x1 = 0.44;
    valley.y1 = 0.94;
    valley.period = 0.12;
    valley.amplitude = 2.5;
    valley.base = 0.0;
    spec.features.push_back(valley);

    PhantomFeature dots;
    dots.kind = PhantomFeature::Kind::dots;
    dots.x0 = 0.60;
    dots.y0 = 0.60;
    dots.pitch = 0.14;
    dots.radius = 0.045;
    dots.shrink = 0.75;
    dots.value = 5.0;
    spec.features.push_back(dots);

    return spec;
}

namespace {

[[noreturn]] void spec_error(int line_no, const std::string& line, const char* why) {
    std::ostringstream msg;
    msg << "phantom spec line " << line_no << " (" << why << "): " << line;
    throw std::runtime_error(msg.str());
}

}  // namespace

PhantomSpec parse_phantom_spec(std::istream& in, int n) {
    PhantomSpec spec;
    spec.n = n;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word) || word[0] == '#') continue;

        PhantomFeature f;
        if (word == "range") {
            if (!(ls >> spec.lo >> spec.hi) || !(spec.lo < spec.hi))
                spec_error(line_no, line, "expected: range LO HI");
            continue;
        } else if (word == "background") {
            f.kind = PhantomFeature::Kind::background;
            if (!(ls >> f.value)) spec_error(line_no, line, "expected: background V");
        } else if (word == "disc") {
            f.kind = PhantomFeature::Kind::disc;
            if (!(ls >> f.x0 >> f.y0 >> f.radius >> f.value) || f.radius <= 0)
                spec_error(line_no, line, "expected: disc CX CY R V");
        } else if (word == "ramp") {
            f.kind = PhantomFeature::Kind::ramp;
            if (!(ls >> f.x0 >> f.y0 >> f.x1 >> f.y1 >> f.value >> f.value2) ||
                !(f.x0 < f.x1 && f.y0 < f.y1))
                spec_error(line_no, line, "expected: ramp X0 Y0 X1 Y1 V0 V1");
        } else if (word == "valley") {
            f.kind = PhantomFeature::Kind::valley;
            if (!(ls >> f.x0 >> f.y0 >> f.x1 >> f.y1 >> f.period >> f.amplitude >> f.base) ||
                !(f.x0 < f.x1 && f.y0 < f.y1) || f.period <= 0)
                spec_error(line_no, line, "expected: valley X0 Y0 X1 Y1 PERIOD AMP BASE");
        } else if (word == "dots") {
            f.kind = PhantomFeature::Kind::dots;
            if (!(ls >> f.x0 >> f.y0 >> f.pitch >> f.radius >> f.shrink >> f.value) ||
                f.pitch <= 0 || f.radius <= 0 || f.shrink <= 0)
                spec_error(line_no, line, "expected: dots X0 Y0 PITCH R0 SHRINK V");
        } else {
            spec_error(line_no, line, "unknown feature");
        }
        spec.features.push_back(f);
    }
    return spec;
}

PhantomSpec load_phantom_spec(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read phantom spec: " + path);
    return parse_phantom_spec(in, n);
}

PixelGrid render_phantom(const PhantomSpec& spec) {
    if (spec.n < 1) throw std::invalid_argument("phantom needs n >= 1");
    if (!(spec.lo < spec.hi)) throw std::invalid_argument("phantom range empty");

    const int n = spec.n;
    PixelGrid g(n, n, 0.0);
    for (const PhantomFeature& f : spec.features) {
        switch (f.kind) {
            case PhantomFeature::Kind::background: {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) g(i, j) = f.value;
                break;
            }
            case PhantomFeature::Kind::disc: {
                for (int i = 0; i < n; ++i) {
                    const double y = (i + 0.5) / n;
                    for (int j = 0; j < n; ++j) {
                        const double x = (j + 0.5) / n;
                        const double dx = x - f.x0, dy = y - f.y0;
                        if (dx * dx + dy * dy <= f.radius * f.radius)
                            g(i, j) = f.value;
                    }
                }
                break;
            }
            case PhantomFeature::Kind::ramp: {
                for (int i = 0; i < n; ++i) {
                    const double y = (i + 0.5) / n;
                    if (y < f.y0 || y > f.y1) continue;
                    for (int j = 0; j < n; ++j) {
                        const double x = (j + 0.5) / n;
                        if (x < f.x0 || x > f.x1) continue;
                        const double t = (x - f.x0) / (f.x1 - f.x0);
                        g(i, j) = f.value + t * (f.value2 - f.value);
                    }
                }
                break;
            }
            case PhantomFeature::Kind::valley: {
                for (int i = 0; i < n; ++i) {
                    const double y = (i + 0.5) / n;
                    if (y < f.y0 || y > f.y1) continue;
                    for (int j = 0; j < n; ++j) {
                        const double x = (j + 0.5) / n;
                        if (x < f.x0 || x > f.x1) continue;
                        const double s =
                            std::sin(std::numbers::pi * (x - f.x0) / f.period);
                        g(i, j) = f.base + f.amplitude * s * s;
                    }
                }
                break;
            }
            case PhantomFeature::Kind::dots: {
                for (int k = 0; k < 9; ++k) {
                    const double cx = f.x0 + (k % 3) * f.pitch;
                    const double cy = f.y0 + (k / 3) * f.pitch;
                    const double r = f.radius * std::pow(f.shrink, k);
                    for (int i = 0; i < n; ++i) {
                        const double y = (i + 0.5) / n;
                        for (int j = 0; j < n; ++j) {
                            const double x = (j + 0.5) / n;
                            const double dx = x - cx, dy = y - cy;
                            if (dx * dx + dy * dy <= r * r) g(i, j) = f.value;
                        }
                    }
                }
                break;
            }
        }
    }

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g(i, j) = std::clamp(g(i, j), spec.lo, spec.hi);
    return g;
}

PixelGrid add_gaussian_noise(const PixelGrid& f, double sigma, uint64_t seed) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
    f.require_finite("noise-free image");
    PixelGrid y = f;
    if (sigma == 0.0) return y;
    auto gen = rng::engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < y.rows(); ++i)
        for (int j = 0; j < y.cols(); ++j)
            y(i, j) += sigma * normal(gen);
    return y;
}

PixelGrid add_poisson_noise(const PixelGrid& f, uint64_t seed) {
    f.require_finite("intensity image");
    for (double v : f.values())
        if (!(v > 0.0))
            throw std::invalid_argument("poisson intensities must be positive");
    PixelGrid y(f.rows(), f.cols());
    auto gen = rng::engine(seed);
    for (int i = 0; i < y.rows(); ++i) {
        for (int j = 0; j < y.cols(); ++j) {
            std::poisson_distribution<long> pois(f(i, j));
            y(i, j) = static_cast<double>(pois(gen));
        }
    }
    return y;
}

}  // namespace mrd
