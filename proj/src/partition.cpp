#include "partition.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mrd {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

int floor_log2(int v) {
    int k = 0;
    while ((1 << (k + 1)) <= v) ++k;
    return k;
}

}  // namespace

PartitionFamily enumerate_dyadic(int n, int min_side) {
    if (n < 1) throw std::invalid_argument("grid side must be positive");
    if (!is_power_of_two(min_side))
        throw std::invalid_argument("min_side must be a power of two");
    if (min_side > n)
        throw std::invalid_argument("min_side exceeds grid side");

    PartitionFamily fam;
    fam.n = n;
    fam.min_side = min_side;
    fam.level_min = floor_log2(min_side);
    fam.level_max = floor_log2(n);

    std::vector<int> level_offset(fam.level_max + 2, 0);
    int id = 0;
    for (int k = fam.level_min; k <= fam.level_max; ++k) {
        level_offset[k] = id;
        const int cnt = n >> k;  // floor(n / 2^k) squares per dimension
        id += cnt * cnt;
    }
    level_offset[fam.level_max + 1] = id;

    fam.squares.reserve(id);
    fam.children.reserve(id);
    for (int k = fam.level_min; k <= fam.level_max; ++k) {
        const int side = 1 << k;
        const int cnt = n >> k;
        for (int r = 0; r < cnt; ++r) {
            for (int c = 0; c < cnt; ++c) {
                DyadicSquare sq{k, r * side, c * side, static_cast<int>(fam.squares.size())};
                std::array<int, 4> kids{-1, -1, -1, -1};
                if (k > fam.level_min) {
                    const int ccnt = n >> (k - 1);
                    const int base = level_offset[k - 1];
                    kids[0] = base + (2 * r) * ccnt + 2 * c;
                    kids[1] = base + (2 * r) * ccnt + 2 * c + 1;
                    kids[2] = base + (2 * r + 1) * ccnt + 2 * c;
                    kids[3] = base + (2 * r + 1) * ccnt + 2 * c + 1;
                }
                fam.squares.push_back(sq);
                fam.children.push_back(kids);
            }
        }
    }
    return fam;
}

namespace {

struct Line {
    double sin_t, cos_t, offset;  // normal (-sin, cos), signed offset from center
};

Line dictionary_line(int side, int angle_count, int angle_idx, int offset_idx) {
    const int m = (side + 1) / 2;
    const double theta = std::numbers::pi * angle_idx / angle_count;
    Line ln;
    ln.sin_t = std::sin(theta);
    ln.cos_t = std::cos(theta);
    ln.offset = side * (2.0 * offset_idx + 1.0 - m) / (2.0 * m);
    return ln;
}

/// Number of pixel centers in a row that lie strictly above the line.
/// Local coordinates put centers at u = col + 0.5, v = row + 0.5 in
/// [0, side]^2; "above" means (-sin, cos) . (p - center) - offset > 0.
/// The sign is nonincreasing in u, so the above-set is a column prefix.
int row_above_count(const Line& ln, int side, int row_in_square) {
    const double half = side / 2.0;
    const double v = row_in_square + 0.5;
    if (ln.sin_t == 0.0) {
        return (ln.cos_t * (v - half) - ln.offset > 0.0) ? side : 0;
    }
    const double u_star = half + (ln.cos_t * (v - half) - ln.offset) / ln.sin_t;
    double cnt = std::ceil(u_star - 0.5);
    if (cnt < 0.0) cnt = 0.0;
    if (cnt > side) cnt = side;
    return static_cast<int>(cnt);
}

}  // namespace

std::vector<Wedge> enumerate_wedges(const DyadicSquare& square, const WedgeDict& dict) {
    std::vector<Wedge> out;
    const int side = square.side();
    if (side < 2 || dict.angle_count <= 0) return out;

    const int m = (side + 1) / 2;
    for (int t = 0; t < dict.angle_count; ++t) {
        for (int q = 0; q < m; ++q) {
            const Line ln = dictionary_line(side, dict.angle_count, t, q);
            long long above = 0;
            for (int r = 0; r < side; ++r) above += row_above_count(ln, side, r);
            const long long below = static_cast<long long>(side) * side - above;
            if (above < dict.min_pixels || below < dict.min_pixels) continue;

            Wedge w;
            w.parent = square;
            w.angle_count = dict.angle_count;
            w.angle_idx = t;
            w.offset_idx = q;
            w.id = (t * m + q) * 2;
            w.above = true;
            w.pixel_count = above;
            out.push_back(w);
            w.id += 1;
            w.above = false;
            w.pixel_count = below;
            out.push_back(w);
        }
    }
    return out;
}

namespace {

WedgeRowRun run_from_count(const Wedge& w, int side, int above) {
    if (w.above) return {w.parent.j0, w.parent.j0 + above};
    return {w.parent.j0 + above, w.parent.j0 + side};
}

}  // namespace

WedgeRowRun wedge_row_run(const Wedge& w, int i) {
    const int side = w.parent.side();
    const int r = i - w.parent.i0;
    if (r < 0 || r >= side) return {0, 0};
    const Line ln = dictionary_line(side, w.angle_count, w.angle_idx, w.offset_idx);
    return run_from_count(w, side, row_above_count(ln, side, r));
}

std::vector<WedgeRowRun> wedge_row_runs(const Wedge& w) {
    const int side = w.parent.side();
    const Line ln = dictionary_line(side, w.angle_count, w.angle_idx, w.offset_idx);
    std::vector<WedgeRowRun> runs(side);
    for (int r = 0; r < side; ++r)
        runs[r] = run_from_count(w, side, row_above_count(ln, side, r));
    return runs;
}

double wedge_sum(const RowPrefixSums& rp, const Wedge& w) {
    const int side = w.parent.side();
    const Line ln = dictionary_line(side, w.angle_count, w.angle_idx, w.offset_idx);
    double total = 0.0;
    for (int r = 0; r < side; ++r) {
        const WedgeRowRun run = run_from_count(w, side, row_above_count(ln, side, r));
        if (run.j_begin < run.j_end)
            total += rp.row_sum(w.parent.i0 + r, run.j_begin, run.j_end - 1);
    }
    return total;
}

}  // namespace mrd
