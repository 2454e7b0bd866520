#pragma once

#include <string>

#include "grid.hpp"

namespace mrd {

/// Plain float CSV, row-major, comma separators, newline rows, written with
/// 17 significant digits so values round-trip exactly.
PixelGrid read_csv(const std::string& path);
void write_csv(const PixelGrid& g, const std::string& path);

/// Binary PGM (P5), 8- or 16-bit (16-bit samples big-endian). Values are
/// returned as raw integers in [0, maxval].
PixelGrid read_pgm(const std::string& path);

/// How float values were mapped to the integer range on write.
struct PgmMapping {
    double lo = 0.0, hi = 0.0;
    int maxval = 255;
    bool identity = false;  // values were integers already in range
};

/// Writes a PGM. Integer-valued grids already inside [0, maxval] are written
/// verbatim; anything else is affinely mapped from [min, max] onto the
/// range. The mapping goes to `sidecar_path` when nonempty.
PgmMapping write_pgm(const PixelGrid& g, const std::string& path, int maxval = 255,
                     const std::string& sidecar_path = "");

/// Dispatches on the extension: .pgm/.pnm read as PGM, everything else CSV.
PixelGrid read_image(const std::string& path);

/// Temp-file-and-rename text write.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace mrd
