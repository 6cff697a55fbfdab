#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dppc/linear_operator.hpp"
#include "dppc/symmetric_dense.hpp"

namespace dppc {

/// t eigenvalues in descending order with column-orthonormal eigenvectors.
/// `index_map` maps local rows to global dataset indices when the pairs were
/// computed on a principal submatrix (empty = identity).
struct EigenPairs {
    std::vector<double> values;   // descending
    std::vector<double> vectors;  // column-major, source_order x t
    std::vector<std::size_t> index_map;
    std::size_t source_order = 0;

    std::size_t count() const { return values.size(); }
    const double* vector(std::size_t i) const { return vectors.data() + i * source_order; }
    double* vector(std::size_t i) { return vectors.data() + i * source_order; }
};

struct LanczosConfig {
    std::size_t t = 10;
    std::size_t krylov_dim = 0;  // 0 selects min(n, max(2t+1, t+20))
    double tol = 1e-8;
    std::size_t max_restarts = 300;
    std::uint64_t seed = 12345;
};

/// Thrown when the restart budget runs out; carries whatever Ritz pairs had
/// converged by then.
class LanczosError : public std::runtime_error {
public:
    LanczosError(const std::string& what, EigenPairs converged)
        : std::runtime_error(what), converged_pairs(std::move(converged)) {}
    EigenPairs converged_pairs;
};

/// Full spectrum of a dense symmetric matrix, values descending.
/// Intended for modest orders; throws above `dense_cap`.
EigenPairs dense_eigh(const SymmetricDense& M, std::size_t dense_cap = 4000);

/// Eigenvalues only (descending), same backend as dense_eigh.
std::vector<double> dense_eigenvalues(const SymmetricDense& M, std::size_t dense_cap = 4000);

/// Implicitly restarted Lanczos for the t algebraically largest eigenpairs of
/// a symmetric operator. Full reorthogonalization at every step; restarts
/// apply implicit QR shifts at the unwanted Ritz values.
EigenPairs lanczos_topk(const LinearOperator& op, const LanczosConfig& cfg);

/// Keep the t largest pairs.
EigenPairs truncate(const EigenPairs& pairs, std::size_t t);

}  // namespace dppc
