#pragma once

#include <array>
#include <vector>

#include "grid.hpp"

namespace mrd {

/// Grid-aligned square with side 2^level and top-left origin (i0, j0), 0-based.
/// Squares of one level tile the largest dyadic sub-grid anchored top-left.
struct DyadicSquare {
    int level = 0;
    int i0 = 0, j0 = 0;
    int id = -1;

    int side() const { return 1 << level; }
    long long pixel_count() const {
        return static_cast<long long>(side()) * side();
    }
};

/// Line dictionary for wedges. Angles are t*pi/angle_count for
/// t = 0..angle_count-1; each angle gets ceil(side/2) offsets evenly spaced
/// across the square. Wedge pairs where either half has fewer than
/// min_pixels pixels are dropped whole.
struct WedgeDict {
    int angle_count = 8;
    int min_pixels = 4;
};

/// Half of a dyadic square cut by a straight dictionary line. A pixel
/// belongs to the "above" side iff its center lies strictly on the positive
/// side of the line; centers on the line count as "below". Per row the
/// pixel set is a contiguous column run.
struct Wedge {
    DyadicSquare parent;
    int angle_count = 8;   // dictionary the line indices refer to
    int angle_idx = 0;
    int offset_idx = 0;
    bool above = true;
    int id = -1;           // stable within the parent square
    long long pixel_count = 0;
};

/// The scan family: every grid-aligned dyadic square with side between
/// min_side and the largest power of two fitting in the grid, ordered
/// smallest scale first. `children` holds the four dyadic sub-squares of
/// each square (-1 entries below the smallest enumerated level).
struct PartitionFamily {
    int n = 0;
    int min_side = 1;
    int level_min = 0, level_max = 0;
    std::vector<DyadicSquare> squares;          // id == index
    std::vector<std::array<int, 4>> children;

    const DyadicSquare& square(int id) const { return squares[id]; }
    long long size() const { return static_cast<long long>(squares.size()); }
};

/// Enumerates the dyadic squares of an n x n grid. min_side must be a power
/// of two not exceeding n. For n not a power of two, squares are anchored
/// top-left and overhanging ones dropped, giving floor(n/2^k)^2 per level.
PartitionFamily enumerate_dyadic(int n, int min_side);

/// All wedges of `square` under `dict`, in stable id order. Both halves of a
/// line are emitted or neither. Squares of side 1 have no wedges.
std::vector<Wedge> enumerate_wedges(const DyadicSquare& square, const WedgeDict& dict);

/// Column run [j_begin, j_end) of the wedge's pixels in absolute row i.
struct WedgeRowRun {
    int j_begin = 0, j_end = 0;
};
WedgeRowRun wedge_row_run(const Wedge& w, int i);

/// Runs for every row of the parent square, top to bottom (absolute rows
/// parent.i0 .. parent.i0+side-1). Cheaper than repeated wedge_row_run.
std::vector<WedgeRowRun> wedge_row_runs(const Wedge& w);

/// Sum of the source over the wedge's pixels: one row-interval lookup per
/// row of the parent square.
double wedge_sum(const RowPrefixSums& rp, const Wedge& w);

}  // namespace mrd
