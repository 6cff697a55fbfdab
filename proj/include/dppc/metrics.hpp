#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "dppc/consensus_types.hpp"

namespace dppc {

struct DensityEstimate {
    std::vector<double> grid;     // strictly increasing abscissae
    std::vector<double> density;  // nonnegative, same length
    double bandwidth = 0.0;
};

struct TimingRecord {
    std::string label;
    double seconds = 0.0;
    std::string config_echo;
};

/// Adjusted Rand index from the contingency table, computed with exact
/// integer arithmetic (128-bit) before the final division. Degenerate
/// denominators (both partitions trivial) return 1.
double adjusted_rand(const Partition& a, const Partition& b);

/// Gaussian KDE with the Silverman bandwidth
/// h = 0.9 min(sd, IQR/1.34) n^{-1/5}, evaluated on a 512-point grid padded
/// by 3h. Throws on fewer than two values or an all-equal sample.
DensityEstimate kde(const std::vector<double>& values);

/// KL(p||q) + KL(q||p) by trapezoid quadrature on a common 512-point grid
/// spanning both inputs; densities are re-evaluated on the common grid by
/// linear interpolation and floored at 1e-12.
double symmetrized_kl(const DensityEstimate& p, const DensityEstimate& q);

/// Wall-clock seconds around a computation (monotonic clock).
template <typename F>
auto time_section(const std::string& label, F&& thunk)
    -> std::pair<decltype(thunk()), TimingRecord> {
    auto start = std::chrono::steady_clock::now();
    auto result = thunk();
    std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return {std::move(result), TimingRecord{label, elapsed.count(), ""}};
}

inline TimingRecord time_section_void(const std::string& label, const std::function<void()>& thunk) {
    auto start = std::chrono::steady_clock::now();
    thunk();
    std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return TimingRecord{label, elapsed.count(), ""};
}

}  // namespace dppc
