#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dppc/symmetric_dense.hpp"

namespace dppc {

/// Compressed sparse row storage of a symmetric matrix; the full pattern is
/// stored (entry (i,j) present iff (j,i) present, with equal values) and
/// column indices are sorted within each row.
class SparseSym {
public:
    SparseSym() = default;

    /// Build from per-row sorted (col, value) lists. The caller must supply a
    /// structurally symmetric pattern; this is verified in debug paths only.
    static SparseSym from_rows(std::size_t order,
                               const std::vector<std::vector<std::pair<std::uint32_t, double>>>& rows);

    std::size_t order() const { return order_; }
    std::size_t nnz() const { return cols_.size(); }

    /// Fraction of structurally zero entries.
    double sparseness() const {
        double total = static_cast<double>(order_) * static_cast<double>(order_);
        return 1.0 - static_cast<double>(nnz()) / total;
    }

    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::uint32_t>& cols() const { return cols_; }
    const std::vector<double>& values() const { return values_; }

    /// Value at (i,j); zero when the entry is not stored.
    double value_at(std::size_t i, std::size_t j) const;

    bool structurally_symmetric() const;

    /// y = A x over the stored (full) pattern.
    void matvec(const double* x, double* y) const;

    SymmetricDense to_dense() const;

private:
    std::size_t order_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> cols_;
    std::vector<double> values_;
};

}  // namespace dppc
