#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dppc {

/// Dense symmetric matrix stored as a packed row-major upper triangle
/// (diagonal included), halving memory relative to full storage.
/// When the matrix is a principal submatrix of a larger kernel,
/// `global_indices` maps local rows to rows of the parent (empty = identity).
class SymmetricDense {
public:
    SymmetricDense() = default;
    explicit SymmetricDense(std::size_t order)
        : order_(order), entries_(order * (order + 1) / 2, 0.0) {}

    std::size_t order() const { return order_; }

    double at(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        return entries_[pack(i, j)];
    }
    void set(std::size_t i, std::size_t j, double v) {
        if (i > j) std::swap(i, j);
        entries_[pack(i, j)] = v;
    }

    const std::vector<double>& packed() const { return entries_; }
    std::vector<double>& packed() { return entries_; }

    /// Row-major packed index for i <= j.
    std::size_t pack(std::size_t i, std::size_t j) const {
        return i * order_ - i * (i - 1) / 2 + (j - i);
    }

    std::vector<std::size_t> global_indices;  // empty when not a submatrix

    /// Sum of all n^2 entries (both triangles).
    double total_sum() const {
        double diag = 0.0, off = 0.0;
        for (std::size_t i = 0; i < order_; ++i) {
            diag += at(i, i);
            const double* r = entries_.data() + pack(i, i);
            for (std::size_t j = i + 1; j < order_; ++j) off += r[j - i];
        }
        return diag + 2.0 * off;
    }

private:
    std::size_t order_ = 0;
    std::vector<double> entries_;
};

}  // namespace dppc
