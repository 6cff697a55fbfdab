#include "dppc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace dppc {

namespace {

using int128 = __int128;

std::uint64_t choose2(std::uint64_t x) { return x * (x - 1) / 2; }

double quantile_sorted(const std::vector<double>& sorted, double q) {
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = static_cast<std::size_t>(std::ceil(pos));
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

// Linear interpolation of a density curve; zero outside its grid.
double interp_density(const DensityEstimate& d, double x) {
    if (x <= d.grid.front() || x >= d.grid.back()) {
        if (x == d.grid.front()) return d.density.front();
        if (x == d.grid.back()) return d.density.back();
        return 0.0;
    }
    auto it = std::upper_bound(d.grid.begin(), d.grid.end(), x);
    auto hi = static_cast<std::size_t>(it - d.grid.begin());
    std::size_t lo = hi - 1;
    double frac = (x - d.grid[lo]) / (d.grid[hi] - d.grid[lo]);
    return d.density[lo] * (1.0 - frac) + d.density[hi] * frac;
}

}  // namespace

double adjusted_rand(const Partition& a, const Partition& b) {
    if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand: size mismatch");
    std::size_t n = a.size();
    if (n < 2) throw std::invalid_argument("adjusted_rand: need n >= 2");

    std::unordered_map<std::uint64_t, std::uint64_t> cells;
    std::unordered_map<std::int32_t, std::uint64_t> rows, cols;
    for (std::size_t i = 0; i < n; ++i) {
        auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a.labels[i])) << 32) |
                   static_cast<std::uint32_t>(b.labels[i]);
        ++cells[key];
        ++rows[a.labels[i]];
        ++cols[b.labels[i]];
    }
    std::uint64_t sum_cells = 0, sum_a = 0, sum_b = 0;
    for (const auto& [_, c] : cells) sum_cells += choose2(c);
    for (const auto& [_, c] : rows) sum_a += choose2(c);
    for (const auto& [_, c] : cols) sum_b += choose2(c);
    std::uint64_t total = choose2(n);

    int128 num = 2 * (static_cast<int128>(total) * sum_cells - static_cast<int128>(sum_a) * sum_b);
    int128 den = static_cast<int128>(total) * (static_cast<int128>(sum_a) + sum_b) -
                 2 * static_cast<int128>(sum_a) * sum_b;
    if (den == 0) return 1.0;  // both partitions degenerate and identical in pair structure
    return static_cast<double>(num) / static_cast<double>(den);
}

DensityEstimate kde(const std::vector<double>& values) {
    std::size_t n = values.size();
    if (n < 2) throw std::invalid_argument("kde: need at least two values");

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(n - 1));

    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

    double spread = std::min(sd, iqr / 1.34);
    if (spread <= 0.0) spread = std::max(sd, iqr / 1.34);
    if (spread <= 0.0) throw std::invalid_argument("kde: degenerate sample (all values equal)");
    double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);

    constexpr std::size_t kGrid = 512;
    DensityEstimate out;
    out.bandwidth = h;
    out.grid.resize(kGrid);
    out.density.resize(kGrid);
    double lo = sorted.front() - 3.0 * h;
    double hi = sorted.back() + 3.0 * h;
    double step = (hi - lo) / static_cast<double>(kGrid - 1);
    const double norm = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * M_PI));
    for (std::size_t g = 0; g < kGrid; ++g) {
        double x = lo + static_cast<double>(g) * step;
        double acc = 0.0;
        for (double v : values) {
            double z = (x - v) / h;
            acc += std::exp(-0.5 * z * z);
        }
        out.grid[g] = x;
        out.density[g] = acc * norm;
    }
    return out;
}

double symmetrized_kl(const DensityEstimate& p, const DensityEstimate& q) {
    constexpr double kFloor = 1e-12;
    constexpr std::size_t kGrid = 512;
    double lo = std::min(p.grid.front(), q.grid.front());
    double hi = std::max(p.grid.back(), q.grid.back());
    double step = (hi - lo) / static_cast<double>(kGrid - 1);

    // integrand (p-q) log(p/q) is pointwise nonnegative, so the quadrature
    // stays nonnegative as well
    double prev = 0.0, acc = 0.0;
    for (std::size_t g = 0; g < kGrid; ++g) {
        double x = lo + static_cast<double>(g) * step;
        double pv = std::max(interp_density(p, x), kFloor);
        double qv = std::max(interp_density(q, x), kFloor);
        double cur = (pv - qv) * std::log(pv / qv);
        if (g > 0) acc += 0.5 * (prev + cur) * step;
        prev = cur;
    }
    return acc;
}

}  // namespace dppc
