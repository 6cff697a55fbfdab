#include "dppc/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dppc/parallel.hpp"

namespace dppc {

Bandwidth estimate_bandwidth(const Dataset& data) {
    if (data.n < 2) throw std::invalid_argument("estimate_bandwidth: need at least two points");
    double total = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = i + 1; j < data.n; ++j) row_sum += data.squared_distance(i, j);
        total += row_sum;
    }
    double denom = static_cast<double>(data.n) * static_cast<double>(data.n - 1);
    double sigma2 = 2.0 * total / denom;
    if (sigma2 <= 0.0) throw std::invalid_argument("estimate_bandwidth: zero bandwidth (all points identical)");
    return Bandwidth{sigma2};
}

SymmetricDense rbf_kernel(const Dataset& data, const Bandwidth& bw, unsigned threads) {
    if (bw.sigma2 <= 0.0) throw std::invalid_argument("rbf_kernel: bandwidth must be positive");
    SymmetricDense L(data.n);
    double inv = 1.0 / (2.0 * bw.sigma2);
    auto* entries = L.packed().data();
    parallel_for_blocks(data.n, threads, [&](std::size_t b, std::size_t e, unsigned) {
        for (std::size_t i = b; i < e; ++i) {
            double* row = entries + L.pack(i, i);
            row[0] = 1.0;
            for (std::size_t j = i + 1; j < data.n; ++j)
                row[j - i] = std::exp(-data.squared_distance(i, j) * inv);
        }
    });
    return L;
}

SymmetricDense principal_submatrix(const SymmetricDense& L, const std::vector<std::size_t>& idx) {
    std::vector<bool> seen(L.order(), false);
    for (std::size_t v : idx) {
        if (v >= L.order()) throw std::invalid_argument("principal_submatrix: index out of range");
        if (seen[v]) throw std::invalid_argument("principal_submatrix: duplicate index");
        seen[v] = true;
    }
    SymmetricDense S(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a; b < idx.size(); ++b) S.set(a, b, L.at(idx[a], idx[b]));
    if (L.global_indices.empty()) {
        S.global_indices = idx;
    } else {
        S.global_indices.resize(idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a) S.global_indices[a] = L.global_indices[idx[a]];
    }
    return S;
}

namespace {

// Per-row neighbor lists: the k nearest of each row by kernel value
// descending (self excluded), ties toward the smaller index.
std::vector<std::vector<std::uint32_t>> knn_lists(const SymmetricDense& L, std::size_t k) {
    std::size_t n = L.order();
    std::vector<std::vector<std::uint32_t>> nbrs(n);
    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order.resize(n - 1);
        std::size_t w = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) order[w++] = static_cast<std::uint32_t>(j);
        auto better = [&](std::uint32_t a, std::uint32_t b) {
            double va = L.at(i, a), vb = L.at(i, b);
            if (va != vb) return va > vb;
            return a < b;
        };
        std::size_t kk = std::min(k, order.size());
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kk - 1), order.end(), better);
        nbrs[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kk));
        std::sort(nbrs[i].begin(), nbrs[i].end());
    }
    return nbrs;
}

// Symmetrized pattern (diagonal included) from directed neighbor lists.
std::vector<std::vector<std::uint32_t>> symmetrize_pattern(
    std::size_t n, const std::vector<std::vector<std::uint32_t>>& nbrs) {
    std::vector<std::vector<std::uint32_t>> pattern(n);
    for (std::size_t i = 0; i < n; ++i) {
        pattern[i].reserve(2 * nbrs[i].size() + 1);
        pattern[i] = nbrs[i];
        pattern[i].push_back(static_cast<std::uint32_t>(i));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::uint32_t j : nbrs[i]) pattern[j].push_back(static_cast<std::uint32_t>(i));
    for (auto& row : pattern) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return pattern;
}

std::size_t pattern_nnz(const std::vector<std::vector<std::uint32_t>>& pattern) {
    std::size_t nnz = 0;
    for (const auto& row : pattern) nnz += row.size();
    return nnz;
}

}  // namespace

SparseSym knn_sparsify(const SymmetricDense& L, std::size_t k) {
    std::size_t n = L.order();
    if (k < 1 || k >= n) throw std::invalid_argument("knn_sparsify: require 1 <= k < order");
    auto pattern = symmetrize_pattern(n, knn_lists(L, k));
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].reserve(pattern[i].size());
        for (std::uint32_t j : pattern[i]) rows[i].emplace_back(j, L.at(i, j));
    }
    return SparseSym::from_rows(n, rows);
}

SparsenessSearch k_for_sparseness(const SymmetricDense& L, double target_sparseness) {
    if (!(target_sparseness > 0.0 && target_sparseness < 1.0))
        throw std::invalid_argument("k_for_sparseness: target must lie in (0,1)");
    std::size_t n = L.order();
    double total = static_cast<double>(n) * static_cast<double>(n);
    auto sparseness_at = [&](std::size_t k) {
        auto pattern = symmetrize_pattern(n, knn_lists(L, k));
        return 1.0 - static_cast<double>(pattern_nnz(pattern)) / total;
    };
    double s1 = sparseness_at(1);
    if (s1 < target_sparseness) return {1, s1, true};
    // sparseness is monotone non-increasing in k: nested neighbor lists
    std::size_t lo = 1, hi = n - 1;  // invariant: sparseness(lo) >= target
    while (lo < hi) {
        std::size_t mid = lo + (hi - lo + 1) / 2;
        if (sparseness_at(mid) >= target_sparseness)
            lo = mid;
        else
            hi = mid - 1;
    }
    return {lo, sparseness_at(lo), false};
}

}  // namespace dppc
