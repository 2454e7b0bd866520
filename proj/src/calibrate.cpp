#include "calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mrc.hpp"
#include "rng.hpp"

namespace mrd {

GumbelNormalizers gumbel_normalizers_real(double n_subsets) {
    if (!(n_subsets > 1.0))
        throw std::invalid_argument("gumbel normalizers need N > 1");
    const double two_log_n = 2.0 * std::log(n_subsets);
    const double root = std::sqrt(two_log_n);
    const double log_2_sqrt_pi = std::log(2.0 * std::sqrt(std::numbers::pi));
    GumbelNormalizers g;
    g.a_n = root + (-0.5 * std::log(std::log(n_subsets)) - log_2_sqrt_pi) / root;
    g.b_n = 1.0 / root;
    return g;
}

GumbelNormalizers gumbel_normalizers(long long n_subsets) {
    if (n_subsets < 3)
        throw std::invalid_argument("gumbel normalizers need N >= 3");
    return gumbel_normalizers_real(static_cast<double>(n_subsets));
}

uint64_t family_hash(const FamilySpec& spec) {
    // FNV-1a over a canonical description string.
    std::ostringstream os;
    os << "dyadic2d:n=" << spec.n << ":min_side=" << spec.min_side;
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : os.str()) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

Calibration calibrate_delta(const FamilySpec& spec, double alpha, int sims,
                            uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0, 1)");
    if (sims < 100)
        throw std::invalid_argument("calibration needs at least 100 simulations");
    if (spec.n < 2)
        throw std::invalid_argument("calibration needs n >= 2");

    const PartitionFamily family = enumerate_dyadic(spec.n, spec.min_side);
    PixelGrid noise(spec.n, spec.n);
    std::vector<double> maxima(sims);
    for (int s = 0; s < sims; ++s) {
        auto gen = rng::substream(seed, static_cast<uint64_t>(s));
        rng::fill_standard_normal(gen, noise.data(), noise.size());
        maxima[s] = max_abs_coefficient(build_sat(noise), family);
    }

    // Quantile type "higher": smallest sample value whose ECDF reaches
    // 1 - alpha. Slightly conservative (larger delta).
    std::sort(maxima.begin(), maxima.end());
    long long k = static_cast<long long>(std::ceil((1.0 - alpha) * sims));
    if (k < 1) k = 1;
    if (k > sims) k = sims;
    const double q = maxima[static_cast<std::size_t>(k - 1)];

    Calibration cal;
    cal.alpha = alpha;
    cal.n = spec.n;
    cal.min_side = spec.min_side;
    cal.delta = q * q / (2.0 * std::log(static_cast<double>(spec.n)));
    cal.sims = sims;
    cal.seed = seed;
    return cal;
}

void save_calibration(const Calibration& cal, const std::string& path) {
    std::ostringstream os;
    os.precision(17);
    os << "# mrdenoise calibration v1\n";
    os << "alpha " << cal.alpha << "\n";
    os << "n " << cal.n << "\n";
    os << "min_side " << cal.min_side << "\n";
    os << "family dyadic-squares\n";
    os << "family_hash " << std::hex << family_hash({cal.n, cal.min_side})
       << std::dec << "\n";
    os << "delta " << cal.delta << "\n";
    os << "sims " << cal.sims << "\n";
    os << "seed " << cal.seed << "\n";

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write calibration file: " + path);
        out << os.str();
        if (!out.flush()) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot move calibration file into place: " + path);
}

Calibration load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read calibration file: " + path);

    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key, value;
        if (!(ls >> key >> value))
            throw std::runtime_error("malformed calibration line: " + line);
        kv[key] = value;
    }
    for (const char* key : {"alpha", "n", "min_side", "delta", "sims", "seed"})
        if (!kv.count(key))
            throw std::runtime_error(std::string("calibration file misses key: ") + key);

    Calibration cal;
    cal.alpha = std::stod(kv["alpha"]);
    cal.n = std::stoi(kv["n"]);
    cal.min_side = std::stoi(kv["min_side"]);
    cal.delta = std::stod(kv["delta"]);
    cal.sims = std::stoi(kv["sims"]);
    cal.seed = std::stoull(kv["seed"]);
    if (kv.count("family_hash")) {
        const uint64_t expect = family_hash({cal.n, cal.min_side});
        if (std::stoull(kv["family_hash"], nullptr, 16) != expect)
            throw std::runtime_error("calibration family hash mismatch");
    }
    return cal;
}

double berman_bound(const std::vector<double>& cov, int dim, double u) {
    if (dim < 1 || cov.size() != static_cast<std::size_t>(dim) * dim)
        throw std::invalid_argument("covariance matrix shape mismatch");
    if (!(u > 0.0)) throw std::invalid_argument("berman bound needs u > 0");

    double total = 0.0;
    for (int i = 0; i < dim; ++i) {
        if (std::fabs(cov[static_cast<std::size_t>(i) * dim + i] - 1.0) > 1e-9)
            throw std::invalid_argument("covariance diagonal must be 1");
        for (int j = i + 1; j < dim; ++j) {
            const double rho = cov[static_cast<std::size_t>(i) * dim + j];
            if (std::fabs(rho) >= 1.0)
                throw std::invalid_argument("off-diagonal |rho| must be < 1");
            if (rho == 0.0) continue;
            total += std::fabs(rho) / std::sqrt(1.0 - rho * rho) *
                     std::exp(-u * u / (1.0 + rho));
        }
    }
    return total / (2.0 * std::numbers::pi);
}

double dyadic_covariance(const DyadicSquare& p1, const DyadicSquare& p2) {
    const int i_lo = std::max(p1.i0, p2.i0);
    const int i_hi = std::min(p1.i0 + p1.side(), p2.i0 + p2.side());
    const int j_lo = std::max(p1.j0, p2.j0);
    const int j_hi = std::min(p1.j0 + p1.side(), p2.j0 + p2.side());
    if (i_lo >= i_hi || j_lo >= j_hi) return 0.0;
    const double inter =
        static_cast<double>(i_hi - i_lo) * static_cast<double>(j_hi - j_lo);
    return inter / std::sqrt(static_cast<double>(p1.pixel_count()) *
                             static_cast<double>(p2.pixel_count()));
}

CovarianceReport check_sparsity(const PartitionFamily& family) {
    CovarianceReport rep;
    rep.family_size = family.size();

    // Ordered nonzero pairs: equal pairs plus two per nested pair. Strict
    // descendants accumulate through the containment index, children first.
    std::vector<long long> descendants(family.squares.size(), 0);
    long long nested = 0;
    double max_rho = 0.0;
    for (std::size_t i = 0; i < family.squares.size(); ++i) {
        for (int c : family.children[i]) {
            if (c < 0) continue;
            descendants[i] += 1 + descendants[c];
            const double rho =
                dyadic_covariance(family.squares[c], family.squares[i]);
            if (rho > max_rho) max_rho = rho;
        }
        nested += descendants[i];
    }
    rep.nonzero_pairs = rep.family_size + 2 * nested;
    rep.max_abs_rho = max_rho;
    return rep;
}

long long dyadic_interval_count(int n, int min_side) {
    if (n < 1) throw std::invalid_argument("interval count needs n >= 1");
    if (min_side < 1 || (min_side & (min_side - 1)) != 0 || min_side > n)
        throw std::invalid_argument("min_side must be a power of two <= n");
    long long total = 0;
    for (int side = min_side; side <= n; side *= 2) {
        total += n / side;
        if (side > n / 2) break;
    }
    return total;
}

CovarianceReport check_sparsity_intervals(int n, int min_side) {
    CovarianceReport rep;
    rep.family_size = dyadic_interval_count(n, min_side);

    // An interval of length 2^k holds 2^(k-i) dyadic intervals of length
    // 2^i; correlation across one level is exactly 1/sqrt(2).
    long long nested = 0;
    double max_rho = 0.0;
    for (int side = min_side; side <= n; side *= 2) {
        const long long cnt = n / side;
        long long desc = 0;
        for (int sub = min_side; sub < side; sub *= 2) desc += side / sub;
        nested += cnt * desc;
        if (side > min_side)
            max_rho = std::max(max_rho, std::sqrt(static_cast<double>(side / 2) /
                                                  static_cast<double>(side)));
        if (side > n / 2) break;
    }
    rep.nonzero_pairs = rep.family_size + 2 * nested;
    rep.max_abs_rho = max_rho;
    return rep;
}

double gumbel_cdf(double tau) { return std::exp(-std::exp(-tau)); }

double ks_distance_to_gumbel(std::vector<double> sample) {
    if (sample.empty()) throw std::invalid_argument("empty sample");
    std::sort(sample.begin(), sample.end());
    const double m = static_cast<double>(sample.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = gumbel_cdf(sample[i]);
        sup = std::max(sup, std::fabs(f - static_cast<double>(i) / m));
        sup = std::max(sup, std::fabs(static_cast<double>(i + 1) / m - f));
    }
    return sup;
}

namespace {

double max_abs_interval_coefficient(const std::vector<double>& values, int min_side) {
    const int n = static_cast<int>(values.size());
    std::vector<double> prefix(n + 1, 0.0);
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + values[i];
    double best = 0.0;
    for (int side = min_side; side <= n; side *= 2) {
        const double norm = std::sqrt(static_cast<double>(side));
        for (int a = 0; a + side <= n; a += side) {
            const double s = std::fabs(prefix[a + side] - prefix[a]) / norm;
            if (s > best) best = s;
        }
        if (side > n / 2) break;
    }
    return best;
}

}  // namespace

GumbelReport verify_gumbel(int n, int dim, int sims, uint64_t seed) {
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("gumbel verification supports d in {1, 2}");
    if (sims < 2) throw std::invalid_argument("need at least 2 simulations");
    if (n < 2) throw std::invalid_argument("need n >= 2");

    GumbelReport rep;
    rep.n = n;
    rep.dim = dim;
    rep.sims = sims;
    rep.seed = seed;

    if (dim == 2) {
        const PartitionFamily family = enumerate_dyadic(n, 1);
        rep.family_size = family.size();
        const GumbelNormalizers g = gumbel_normalizers(rep.family_size);
        rep.a_n = g.a_n;
        rep.b_n = g.b_n;
        PixelGrid noise(n, n);
        rep.sample.resize(sims);
        for (int s = 0; s < sims; ++s) {
            auto gen = rng::substream(seed, static_cast<uint64_t>(s));
            rng::fill_standard_normal(gen, noise.data(), noise.size());
            const double m = max_abs_coefficient(build_sat(noise), family);
            rep.sample[s] = (m - g.a_n) / g.b_n;
        }
    } else {
        rep.family_size = dyadic_interval_count(n, 1);
        const GumbelNormalizers g = gumbel_normalizers(rep.family_size);
        rep.a_n = g.a_n;
        rep.b_n = g.b_n;
        std::vector<double> noise(static_cast<std::size_t>(n));
        rep.sample.resize(sims);
        for (int s = 0; s < sims; ++s) {
            auto gen = rng::substream(seed, static_cast<uint64_t>(s));
            rng::fill_standard_normal(gen, noise.data(), noise.size());
            const double m = max_abs_interval_coefficient(noise, 1);
            rep.sample[s] = (m - g.a_n) / g.b_n;
        }
    }
    rep.sup_distance = ks_distance_to_gumbel(rep.sample);
    return rep;
}

}  // namespace mrd
