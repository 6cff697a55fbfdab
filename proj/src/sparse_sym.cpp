#include "dppc/sparse_sym.hpp"

#include <algorithm>
#include <stdexcept>

namespace dppc {

SparseSym SparseSym::from_rows(std::size_t order,
                               const std::vector<std::vector<std::pair<std::uint32_t, double>>>& rows) {
    if (rows.size() != order) throw std::invalid_argument("SparseSym: row count mismatch");
    SparseSym s;
    s.order_ = order;
    s.row_ptr_.assign(order + 1, 0);
    std::size_t nnz = 0;
    for (std::size_t i = 0; i < order; ++i) {
        nnz += rows[i].size();
        s.row_ptr_[i + 1] = nnz;
    }
    s.cols_.reserve(nnz);
    s.values_.reserve(nnz);
    for (std::size_t i = 0; i < order; ++i) {
        std::uint32_t prev = 0;
        bool first = true;
        for (const auto& [c, v] : rows[i]) {
            if (c >= order) throw std::invalid_argument("SparseSym: column out of range");
            if (!first && c <= prev) throw std::invalid_argument("SparseSym: unsorted row");
            prev = c;
            first = false;
            s.cols_.push_back(c);
            s.values_.push_back(v);
        }
    }
    return s;
}

double SparseSym::value_at(std::size_t i, std::size_t j) const {
    auto b = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    auto e = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    auto it = std::lower_bound(b, e, static_cast<std::uint32_t>(j));
    if (it == e || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - cols_.begin())];
}

bool SparseSym::structurally_symmetric() const {
    for (std::size_t i = 0; i < order_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            std::size_t j = cols_[k];
            auto b = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j]);
            auto e = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j + 1]);
            auto it = std::lower_bound(b, e, static_cast<std::uint32_t>(i));
            if (it == e || *it != i) return false;
            if (values_[static_cast<std::size_t>(it - cols_.begin())] != values_[k]) return false;
        }
    }
    return true;
}

void SparseSym::matvec(const double* x, double* y) const {
    for (std::size_t i = 0; i < order_; ++i) {
        double acc = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += values_[k] * x[cols_[k]];
        y[i] = acc;
    }
}

SymmetricDense SparseSym::to_dense() const {
    SymmetricDense d(order_);
    for (std::size_t i = 0; i < order_; ++i)
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            if (cols_[k] >= i) d.set(i, cols_[k], values_[k]);
    return d;
}

}  // namespace dppc
