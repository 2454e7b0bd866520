#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "grid.hpp"

namespace mrd {

/// One drawable feature. Coordinates live in the unit square with
/// x = (col + 0.5)/n, y = (row + 0.5)/n; later features overwrite earlier
/// ones where they apply, and the rendered values are clamped to the range.
struct PhantomFeature {
    enum class Kind { background, disc, ramp, valley, dots };
    Kind kind = Kind::background;
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // box corners or center
    double radius = 0;
    double value = 0, value2 = 0;           // level, or ramp endpoints
    double period = 0, amplitude = 0, base = 0;
    double pitch = 0, shrink = 1.0;         // dot array geometry
};

struct PhantomSpec {
    int n = 256;
    double lo = 0.0, hi = 5.0;
    std::vector<PhantomFeature> features;
};

/// Built-in analog of the usual test image: constant background, a large
/// disc upper left, sinusoidal valleys lower left and a 3x3 array of
/// shrinking dots lower right, values in [0, 5].
PhantomSpec default_phantom(int n);

/// Text format, one feature per line ('#' comments allowed):
///   range LO HI
///   background V
///   disc CX CY R V
///   ramp X0 Y0 X1 Y1 V0 V1        (linear in x across the box)
///   valley X0 Y0 X1 Y1 PERIOD AMP BASE
///   dots X0 Y0 PITCH R0 SHRINK V  (3x3 discs, radii R0 * SHRINK^k)
PhantomSpec parse_phantom_spec(std::istream& in, int n);
PhantomSpec load_phantom_spec(const std::string& path, int n);

PixelGrid render_phantom(const PhantomSpec& spec);

/// y = f + sigma * Z with i.i.d. standard normal Z, filled row-major.
PixelGrid add_gaussian_noise(const PixelGrid& f, double sigma, uint64_t seed);

/// Independent Poisson counts with per-pixel mean f > 0.
PixelGrid add_poisson_noise(const PixelGrid& f, uint64_t seed);

}  // namespace mrd
