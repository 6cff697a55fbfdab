#pragma once

#include <cstddef>

#include "dppc/sparse_sym.hpp"
#include "dppc/symmetric_dense.hpp"

namespace dppc {

/// Symmetric linear operator on R^n, the input to the Lanczos solver.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual std::size_t order() const = 0;
    virtual void apply(const double* x, double* y) const = 0;
};

class DenseOperator final : public LinearOperator {
public:
    explicit DenseOperator(const SymmetricDense& m) : m_(m) {}
    std::size_t order() const override { return m_.order(); }
    void apply(const double* x, double* y) const override {
        std::size_t n = m_.order();
        const double* packed = m_.packed().data();
        for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = packed + m_.pack(i, i);
            double acc = row[0] * x[i];
            double xi = x[i];
            for (std::size_t j = i + 1; j < n; ++j) {
                double v = row[j - i];
                acc += v * x[j];
                y[j] += v * xi;
            }
            y[i] += acc;
        }
    }

private:
    const SymmetricDense& m_;
};

class SparseOperator final : public LinearOperator {
public:
    explicit SparseOperator(const SparseSym& m) : m_(m) {}
    std::size_t order() const override { return m_.order(); }
    void apply(const double* x, double* y) const override { m_.matvec(x, y); }

private:
    const SparseSym& m_;
};

}  // namespace dppc
