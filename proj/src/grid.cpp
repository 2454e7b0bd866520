#include "grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mrd {

PixelGrid::PixelGrid(int rows, int cols, double fill)
    : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("grid dimensions must be positive");
    values_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

PixelGrid::PixelGrid(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("grid dimensions must be positive");
    if (values_.size() != static_cast<std::size_t>(rows) * cols)
        throw std::invalid_argument("grid value count does not match dimensions");
}

bool PixelGrid::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

void PixelGrid::require_finite(const char* what) const {
    if (!all_finite())
        throw std::invalid_argument(std::string(what) + " contains NaN or Inf");
}

SummedAreaTable build_sat(const PixelGrid& source) {
    source.require_finite("summed-area table source");
    SummedAreaTable sat;
    sat.rows_ = source.rows();
    sat.cols_ = source.cols();
    const int cols = sat.cols_;
    sat.table_.assign(static_cast<std::size_t>(sat.rows_ + 1) * (cols + 1), 0.0);
    for (int i = 0; i < sat.rows_; ++i) {
        double* cur = &sat.table_[static_cast<std::size_t>(i + 1) * (cols + 1)];
        const double* prev = &sat.table_[static_cast<std::size_t>(i) * (cols + 1)];
        for (int j = 0; j < cols; ++j)
            cur[j + 1] = source(i, j) + prev[j + 1] + cur[j] - prev[j];
    }
    return sat;
}

double rect_sum(const SummedAreaTable& sat, int i1, int i2, int j1, int j2) {
    if (i1 < 0 || j1 < 0 || i1 > i2 || j1 > j2 || i2 >= sat.rows() || j2 >= sat.cols())
        throw std::out_of_range("rect out of bounds");
    return sat.cum(i2, j2) - sat.cum(i1 - 1, j2) - sat.cum(i2, j1 - 1) +
           sat.cum(i1 - 1, j1 - 1);
}

RowPrefixSums build_row_prefix(const PixelGrid& source) {
    source.require_finite("row prefix source");
    RowPrefixSums rp;
    rp.rows_ = source.rows();
    rp.cols_ = source.cols();
    rp.prefix_.assign(static_cast<std::size_t>(rp.rows_) * (rp.cols_ + 1), 0.0);
    for (int i = 0; i < rp.rows_; ++i) {
        double* p = &rp.prefix_[static_cast<std::size_t>(i) * (rp.cols_ + 1)];
        for (int j = 0; j < rp.cols_; ++j)
            p[j + 1] = p[j] + source(i, j);
    }
    return rp;
}

}  // namespace mrd
