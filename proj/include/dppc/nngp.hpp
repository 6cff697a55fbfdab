#pragma once

#include <cstdint>
#include <vector>

#include "dppc/dataset.hpp"
#include "dppc/linear_operator.hpp"
#include "dppc/sparse_sym.hpp"
#include "dppc/symmetric_dense.hpp"

namespace dppc {

/// Sparse Cholesky-style factor: A is strictly lower triangular with at most
/// m nonzeros per row (columns N_i), D is a positive diagonal. Together they
/// represent the approximation (I-A)^{-1} D (I-A)^{-T} of the kernel.
struct NNGPFactor {
    std::size_t order = 0;
    std::size_t m = 0;
    std::vector<std::size_t> row_ptr;       // order+1; N_i = neighbors[row_ptr[i]..row_ptr[i+1])
    std::vector<std::uint32_t> neighbors;   // ascending within each row, all < i
    std::vector<double> a_values;           // aligned with neighbors
    std::vector<double> d;                  // order, strictly positive

    std::size_t neighbor_count(std::size_t i) const { return row_ptr[i + 1] - row_ptr[i]; }
};

/// Applies the implicitly represented approximation: y = (I-A)^{-1} D (I-A)^{-T} x
/// via one backward and one forward triangular solve plus a diagonal scale,
/// O(n m) per product. Immutable and safe to share across threads.
class NNGPOperator final : public LinearOperator {
public:
    explicit NNGPOperator(NNGPFactor factor) : factor_(std::move(factor)) {}
    std::size_t order() const override { return factor_.order; }
    void apply(const double* x, double* y) const override;

    /// y = (I-A)^T D^{-1} (I-A) x, the sparse precision applied to x.
    void apply_precision(const double* x, double* y) const;

    const NNGPFactor& factor() const { return factor_; }

private:
    NNGPFactor factor_;
};

/// Per-row predecessor neighbor sets: the m nearest predecessors by Euclidean
/// distance (all predecessors for the first m rows), ties toward the smaller
/// index. Ascending within each row.
std::vector<std::vector<std::uint32_t>> neighbor_sets(const Dataset& data, std::size_t m);

/// Solves the per-row SPD systems A_{i,N_i} = L_{N_i}^{-1} L_{N_i,i} and
/// D_ii = L_ii - L_{i,N_i} A_{i,N_i}^T, with `ridge` added to each block
/// diagonal when positive. O(n m^3) total.
NNGPFactor build_factor(const SymmetricDense& L, const std::vector<std::vector<std::uint32_t>>& neighbors,
                        double ridge = 0.0, unsigned threads = 1);

/// Spec'd default regularization for build_factor.
double default_ridge(const SymmetricDense& L);

std::vector<double> apply_operator(const NNGPOperator& op, const std::vector<double>& v);
std::vector<double> apply_precision(const NNGPOperator& op, const std::vector<double>& v);

/// Materialized sparse precision (I-A)^T D^{-1} (I-A); diagnostics-scale only,
/// the clustering pipeline works through the operator.
SparseSym precision_matrix(const NNGPFactor& factor);

/// Nonzero bound n m(m+1)/2 + n for the precision pattern.
std::size_t precision_nnz_bound(std::size_t n, std::size_t m);

/// Neighbor cap m achieving precision sparseness s via
/// n m(m+1)/2 + n = (1-s) n^2, rounded and clamped to [1, n-1].
std::size_t m_for_sparseness(std::size_t n, double sparseness);

/// m-nearest-neighbor comparison matrix: row i keeps L_ij for the predecessor
/// neighbors N_i (ranked by kernel value), union-symmetrized; diagonal kept.
SparseSym mnn_matrix(const SymmetricDense& L, std::size_t m_nn);

/// Largest m_nn whose mnn_matrix pattern has zero-fraction >= target.
struct MnnSearch {
    std::size_t m_nn = 0;
    double achieved = 0.0;
    bool target_unreachable = false;
};
MnnSearch mnn_for_sparseness(const SymmetricDense& L, double target_sparseness);

double frobenius_distance(const SymmetricDense& a, const SymmetricDense& b);
double frobenius_distance(const SymmetricDense& a, const SparseSym& b);

struct FrobeniusEstimate {
    double value = 0.0;
    bool sampled = false;  // true when estimated from a column sample
};

/// || a - op || in Frobenius norm; columns of the operator are materialized
/// through basis-vector products (O(n^2 m)). With sample_columns > 0 and
/// < n, an unbiased column-sampled estimate is returned instead (flagged).
FrobeniusEstimate frobenius_distance(const SymmetricDense& a, const NNGPOperator& op,
                                     std::size_t sample_columns = 0, std::uint64_t seed = 0);

}  // namespace dppc
