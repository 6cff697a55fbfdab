#pragma once

#include <cstddef>
#include <vector>

#include "dppc/dataset.hpp"
#include "dppc/sparse_sym.hpp"
#include "dppc/symmetric_dense.hpp"

namespace dppc {

/// Squared RBF length-scale.
struct Bandwidth {
    double sigma2 = 0.0;
};

/// Mean of all pairwise squared Euclidean distances,
/// 2 * sum_{i<j} ||x_i - x_j||^2 / (n (n-1)). Throws when every point is
/// identical ("zero bandwidth") or n < 2.
Bandwidth estimate_bandwidth(const Dataset& data);

/// L_ij = exp(-||x_i - x_j||^2 / (2 sigma2)); unit diagonal.
SymmetricDense rbf_kernel(const Dataset& data, const Bandwidth& bw, unsigned threads = 1);

/// Restriction of L to idx x idx, preserving idx order. The result carries
/// the index map (composed with L's own map when L is itself a submatrix).
SymmetricDense principal_submatrix(const SymmetricDense& L, const std::vector<std::size_t>& idx);

/// Union-symmetrized k-nearest-neighbor sparsification: entry (i,j) is kept
/// iff j is among the k nearest neighbors of i or i among the k nearest of j,
/// with neighbors ranked by kernel value descending and ties broken by the
/// smaller index. The diagonal is always kept; kept values equal L's.
SparseSym knn_sparsify(const SymmetricDense& L, std::size_t k);

struct SparsenessSearch {
    std::size_t k = 0;
    double achieved = 0.0;
    bool target_unreachable = false;  // even k=1 is denser than requested
};

/// Largest k whose symmetrized kNN pattern still has zero-fraction >= target.
SparsenessSearch k_for_sparseness(const SymmetricDense& L, double target_sparseness);

}  // namespace dppc
