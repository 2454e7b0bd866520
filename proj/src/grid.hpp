#pragma once

#include <cstddef>
#include <vector>

namespace mrd {

/// Dense 2-D real grid, row-major, 0-based indexing.
///
/// Carries the data y, reconstructions, residuals and diffusivity fields.
/// Statistical operations require a square grid; I/O accepts rectangles.
class PixelGrid {
public:
    PixelGrid() = default;
    PixelGrid(int rows, int cols, double fill = 0.0);
    PixelGrid(int rows, int cols, std::vector<double> values);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ > 0 && rows_ == cols_; }
    std::size_t size() const { return values_.size(); }

    double operator()(int i, int j) const { return values_[idx(i, j)]; }
    double& operator()(int i, int j) { return values_[idx(i, j)]; }

    const double* data() const { return values_.data(); }
    double* data() { return values_.data(); }
    const std::vector<double>& values() const { return values_; }

    bool all_finite() const;
    /// Throws std::invalid_argument naming `what` if any value is NaN/Inf.
    void require_finite(const char* what) const;

private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * cols_ + j;
    }

    int rows_ = 0, cols_ = 0;
    std::vector<double> values_;
};

/// Cumulative-sum matrix of a source grid: cum(i, j) is the sum of all
/// source values with row <= i and column <= j (0-based, inclusive).
/// Rectangle sums then cost four lookups.
class SummedAreaTable {
public:
    SummedAreaTable() = default;

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    /// Inclusive prefix sum; i or j equal to -1 yields 0.
    double cum(int i, int j) const {
        return table_[static_cast<std::size_t>(i + 1) * (cols_ + 1) + (j + 1)];
    }

    friend SummedAreaTable build_sat(const PixelGrid& source);

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> table_;  // (rows+1) x (cols+1), zero top row/left column
};

/// Builds the cumulative-sum table in a fixed row-major pass so results are
/// bit-reproducible for identical inputs.
SummedAreaTable build_sat(const PixelGrid& source);

/// Sum of the source over rows [i1, i2] x columns [j1, j2], inclusive,
/// via the four-corner formula. Throws std::out_of_range on bad rectangles.
double rect_sum(const SummedAreaTable& sat, int i1, int i2, int j1, int j2);

/// Per-row prefix sums; row_sum is O(1). Used for wedge sums, where the
/// pixel set is a contiguous column run per row.
class RowPrefixSums {
public:
    RowPrefixSums() = default;

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    /// Sum over row i, columns [j1, j2] inclusive (empty when j1 > j2).
    double row_sum(int i, int j1, int j2) const {
        const double* p = &prefix_[static_cast<std::size_t>(i) * (cols_ + 1)];
        return p[j2 + 1] - p[j1];
    }

    friend RowPrefixSums build_row_prefix(const PixelGrid& source);

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> prefix_;  // rows x (cols+1)
};

RowPrefixSums build_row_prefix(const PixelGrid& source);

}  // namespace mrd
