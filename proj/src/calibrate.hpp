#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "partition.hpp"

namespace mrd {

/// Normalizing sequences of the Gumbel limit for the maximum of N
/// standardized Gaussians: a_N location, b_N scale.
struct GumbelNormalizers {
    double a_n = 0.0;
    double b_n = 0.0;
};

/// a_N = sqrt(2 log N) + (-1/2 log log N - log 2 sqrt(pi)) / sqrt(2 log N),
/// b_N = 1 / sqrt(2 log N). Integer entry point requires N >= 3.
GumbelNormalizers gumbel_normalizers(long long n_subsets);
/// Real-valued helper (N > 1), handy for checking the formulas directly.
GumbelNormalizers gumbel_normalizers_real(double n_subsets);

/// Scan family parameters the calibration refers to: dyadic squares of an
/// n x n grid down to min_side.
struct FamilySpec {
    int n = 256;
    int min_side = 1;
};

uint64_t family_hash(const FamilySpec& spec);

/// Monte-Carlo calibration of the criterion: delta such that a fresh white
/// noise field violates |omega_P| <= sigma sqrt(delta log n^2) somewhere
/// with frequency ~= alpha.
struct Calibration {
    double alpha = 0.05;
    int n = 256;
    int min_side = 1;
    double delta = 0.0;
    int sims = 0;
    uint64_t seed = 0;
};

/// Simulates `sims` standard normal grids, takes the empirical (1-alpha)
/// quantile q of max_P |omega_P| (quantile type "higher": smallest sample
/// value whose ECDF reaches 1-alpha) and returns delta = q^2 / log n^2.
Calibration calibrate_delta(const FamilySpec& spec, double alpha, int sims,
                            uint64_t seed);

void save_calibration(const Calibration& cal, const std::string& path);
Calibration load_calibration(const std::string& path);

/// Berman's inequality bound on how far the CDF of the maximum of a
/// correlated standard Gaussian vector can sit above the independent case:
/// (1/2pi) sum_{i<j} |rho_ij| / sqrt(1 - rho_ij^2) * exp(-u^2 / (1 + rho_ij)).
/// `cov` is a row-major dim x dim symmetric matrix with unit diagonal;
/// off-diagonal entries must satisfy |rho| < 1.
double berman_bound(const std::vector<double>& cov, int dim, double u);

/// Covariance of the multiresolution coefficients of two dyadic squares
/// under white noise: #(P1 cap P2) / sqrt(#P1 #P2). Dyadic squares are
/// disjoint or nested, so this is 0, 1, or sqrt(#small / #big) <= 1/sqrt(2).
double dyadic_covariance(const DyadicSquare& p1, const DyadicSquare& p2);

struct CovarianceReport {
    long long family_size = 0;
    long long nonzero_pairs = 0;  // ordered pairs, equal ones included
    double max_abs_rho = 0.0;     // largest off-diagonal |covariance|
};

/// Counts ordered pairs with nonzero covariance through the containment
/// index and reports the largest off-diagonal correlation. For 2-D squares
/// that maximum is 1/2 (quarter-size children); the 1-D interval variant
/// below attains the 1/sqrt(2) bound exactly.
CovarianceReport check_sparsity(const PartitionFamily& family);
CovarianceReport check_sparsity_intervals(int n, int min_side);

long long dyadic_interval_count(int n, int min_side);

/// Empirical check of the Gumbel limit: simulates white noise on {1..n}^d,
/// forms M' = max_P |sum r| / sqrt(#P) over dyadic subcubes, normalizes by
/// (a_N, b_N) with N the family size, and reports the Kolmogorov distance
/// of the normalized sample to exp(-e^{-tau}).
struct GumbelReport {
    int n = 0;
    int dim = 2;
    long long family_size = 0;
    int sims = 0;
    uint64_t seed = 0;
    double a_n = 0.0, b_n = 0.0;
    double sup_distance = 0.0;
    std::vector<double> sample;  // normalized maxima in simulation order
};

GumbelReport verify_gumbel(int n, int dim, int sims, uint64_t seed);

double gumbel_cdf(double tau);
/// sup_x |F_sample(x) - exp(-e^{-x})|; sorts a copy of the sample.
double ks_distance_to_gumbel(std::vector<double> sample);

}  // namespace mrd
