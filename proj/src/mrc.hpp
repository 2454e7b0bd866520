#pragma once

#include <vector>

#include "grid.hpp"
#include "partition.hpp"

namespace mrd {

enum class NoiseModel { gaussian, poisson };

/// Residual field r = y - fhat (Gaussian) or fhat^{-1/2}(y - fhat) (Poisson).
/// `sigma` is the noise scale the criterion tests against; Poisson-normalized
/// residuals carry sigma = 1.
struct Residuals {
    PixelGrid grid;
    NoiseModel model = NoiseModel::gaussian;
    double sigma = 1.0;
};

/// The gate sigma * sqrt(delta * log n^2) every coefficient is tested against.
struct Threshold {
    double sigma = 1.0;
    double delta = 2.0;
    int n = 2;

    double value() const;
};

struct Violation {
    int subset_id = -1;
    double omega = 0.0;
    long long scale = 0;  // pixel count of the subset
};

/// Multiresolution coefficient: (sum of residuals over the subset) / sqrt(#P).
double coefficient(const SummedAreaTable& residual_sat, const DyadicSquare& p);
double coefficient(const RowPrefixSums& residual_rows, const Wedge& w);

/// max_P |omega_P| over the family.
double max_abs_coefficient(const SummedAreaTable& residual_sat,
                           const PartitionFamily& family);

/// Robust noise-level estimate from the median of absolute double
/// differences; exact (zero) on affine images. Needs at least 2x2 pixels.
double estimate_sigma(const PixelGrid& y);

/// Smallest mean intensity for which the Gaussian approximation of Poisson
/// residuals is accepted.
inline constexpr double kIntensityFloor = 10.0;

/// r = fhat^{-1/2} (y - fhat); requires fhat >= kIntensityFloor everywhere.
Residuals normalize_poisson(const PixelGrid& y, const PixelGrid& fhat);

/// All squares violating |omega_P| > threshold, ordered by ascending pixel
/// count, ties by id. Wedges are not scanned here; the adaptation loop
/// consults them only inside violating squares.
std::vector<Violation> scan(const SummedAreaTable& residual_sat,
                            const PartitionFamily& family, const Threshold& t);
std::vector<Violation> scan(const Residuals& r, const PartitionFamily& family,
                            const Threshold& t);

/// Scan statistic M_n = max_P |omega_P| / sqrt(2 log n^2); tends to the noise
/// level on white noise.
double statistic_mn(const SummedAreaTable& residual_sat, const PartitionFamily& family);
double statistic_mn(const Residuals& r, const PartitionFamily& family);

/// Membership test for the confidence region: true iff
/// max_P |sum_{P}(y - g)| / sqrt(#P) <= sigma * sqrt(tau_n log n^2).
bool in_confidence_region(const PixelGrid& g, const PixelGrid& y, double sigma,
                          double tau_n, const PartitionFamily& family);

}  // namespace mrd
