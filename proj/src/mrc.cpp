#include "mrc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrd {

namespace {

// Phi^{-1}(0.75) to double precision; fixed constant, no runtime special
// function needed.
constexpr double kProbitThreeQuarters = 0.6744897501960817;

double log_n_squared(int n) {
    if (n < 2) throw std::invalid_argument("statistical operations need n >= 2");
    return 2.0 * std::log(static_cast<double>(n));
}

void require_same_shape(const PixelGrid& a, const PixelGrid& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(what) + ": shapes do not match");
}

}  // namespace

double Threshold::value() const {
    if (sigma < 0.0 || delta <= 0.0)
        throw std::invalid_argument("threshold needs sigma >= 0 and delta > 0");
    return sigma * std::sqrt(delta * log_n_squared(n));
}

double coefficient(const SummedAreaTable& residual_sat, const DyadicSquare& p) {
    const long long count = p.pixel_count();
    if (count <= 0) throw std::invalid_argument("empty subset");
    const int side = p.side();
    const double s = rect_sum(residual_sat, p.i0, p.i0 + side - 1, p.j0, p.j0 + side - 1);
    return s / std::sqrt(static_cast<double>(count));
}

double coefficient(const RowPrefixSums& residual_rows, const Wedge& w) {
    if (w.pixel_count <= 0) throw std::invalid_argument("empty subset");
    return wedge_sum(residual_rows, w) / std::sqrt(static_cast<double>(w.pixel_count));
}

double max_abs_coefficient(const SummedAreaTable& residual_sat,
                           const PartitionFamily& family) {
    if (family.squares.empty()) throw std::invalid_argument("empty family");
    double best = 0.0;
    for (const DyadicSquare& sq : family.squares) {
        const double w = std::fabs(coefficient(residual_sat, sq));
        if (w > best) best = w;
    }
    return best;
}

double estimate_sigma(const PixelGrid& y) {
    if (y.rows() < 2 || y.cols() < 2)
        throw std::invalid_argument("sigma estimation needs at least 2x2 pixels");
    y.require_finite("sigma estimation input");

    std::vector<double> diffs;
    diffs.reserve(static_cast<std::size_t>(y.rows() - 1) * (y.cols() - 1));
    for (int i = 1; i < y.rows(); ++i)
        for (int j = 1; j < y.cols(); ++j)
            diffs.push_back(std::fabs(y(i, j) - y(i - 1, j) - y(i, j - 1) + y(i - 1, j - 1)));

    // Median with the even-length convention: mean of the two central
    // order statistics.
    const std::size_t m = diffs.size();
    const std::size_t hi = m / 2;
    std::nth_element(diffs.begin(), diffs.begin() + hi, diffs.end());
    double med = diffs[hi];
    if (m % 2 == 0) {
        const double lo = *std::max_element(diffs.begin(), diffs.begin() + hi);
        med = 0.5 * (lo + med);
    }
    return med / (2.0 * kProbitThreeQuarters);
}

Residuals normalize_poisson(const PixelGrid& y, const PixelGrid& fhat) {
    require_same_shape(y, fhat, "poisson normalization");
    y.require_finite("poisson data");
    fhat.require_finite("poisson intensities");

    PixelGrid r(y.rows(), y.cols());
    for (int i = 0; i < y.rows(); ++i) {
        for (int j = 0; j < y.cols(); ++j) {
            const double f = fhat(i, j);
            if (f < kIntensityFloor)
                throw std::invalid_argument(
                    "intensity too small for Gaussian approximation");
            r(i, j) = (y(i, j) - f) / std::sqrt(f);
        }
    }
    return Residuals{std::move(r), NoiseModel::poisson, 1.0};
}

std::vector<Violation> scan(const SummedAreaTable& residual_sat,
                            const PartitionFamily& family, const Threshold& t) {
    const double gate = t.value();
    std::vector<Violation> out;
    // Family order is ascending level then id, which is exactly ascending
    // pixel count with ties by id.
    for (const DyadicSquare& sq : family.squares) {
        const double w = coefficient(residual_sat, sq);
        if (std::fabs(w) > gate)
            out.push_back(Violation{sq.id, w, sq.pixel_count()});
    }
    return out;
}

std::vector<Violation> scan(const Residuals& r, const PartitionFamily& family,
                            const Threshold& t) {
    if (r.grid.rows() != family.n || r.grid.cols() != family.n)
        throw std::invalid_argument("scan: residual shape does not match family");
    return scan(build_sat(r.grid), family, t);
}

double statistic_mn(const SummedAreaTable& residual_sat, const PartitionFamily& family) {
    return max_abs_coefficient(residual_sat, family) /
           std::sqrt(2.0 * log_n_squared(family.n));
}

double statistic_mn(const Residuals& r, const PartitionFamily& family) {
    return statistic_mn(build_sat(r.grid), family);
}

bool in_confidence_region(const PixelGrid& g, const PixelGrid& y, double sigma,
                          double tau_n, const PartitionFamily& family) {
    require_same_shape(g, y, "confidence region");
    if (y.rows() != family.n || y.cols() != family.n)
        throw std::invalid_argument("confidence region: shape does not match family");
    PixelGrid diff(y.rows(), y.cols());
    for (int i = 0; i < y.rows(); ++i)
        for (int j = 0; j < y.cols(); ++j)
            diff(i, j) = y(i, j) - g(i, j);
    const double gate = Threshold{sigma, tau_n, family.n}.value();
    return max_abs_coefficient(build_sat(diff), family) <= gate;
}

}  // namespace mrd
