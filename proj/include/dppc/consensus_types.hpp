#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace dppc {

/// Dense 0-based cluster labeling of n points.
struct Partition {
    std::vector<std::int32_t> labels;
    std::int32_t k = 0;

    std::size_t size() const { return labels.size(); }
    void validate() const {
        if (k < 1) throw std::invalid_argument("Partition: k must be >= 1");
        for (auto l : labels)
            if (l < 0 || l >= k) throw std::invalid_argument("Partition: label out of range");
    }
};

/// Relabels arbitrary nonnegative ids to dense 0..k-1 in order of first
/// appearance.
Partition compact_partition(std::vector<std::int32_t> raw);

/// Pairwise co-clustering counts over R accumulated runs, stored as a packed
/// strict upper triangle of 16-bit counters. The diagonal is implicitly R
/// (every point co-clusters with itself).
class ConsensusMatrix {
public:
    ConsensusMatrix() = default;
    explicit ConsensusMatrix(std::size_t order)
        : order_(order), counts_(order * (order - 1) / 2, 0) {}

    std::size_t order() const { return order_; }
    std::uint16_t runs() const { return runs_; }

    std::size_t pack(std::size_t i, std::size_t j) const {
        // strict upper triangle, i < j
        return i * order_ - i * (i + 1) / 2 + (j - i - 1);
    }

    std::uint16_t count(std::size_t i, std::size_t j) const {
        if (i == j) return runs_;
        if (i > j) std::swap(i, j);
        return counts_[pack(i, j)];
    }

    /// Consensus index C_ij = count/R; C_ii = 1.
    double value(std::size_t i, std::size_t j) const {
        if (i == j) return 1.0;
        return static_cast<double>(count(i, j)) / static_cast<double>(runs_);
    }

    /// Increments co-occurrence counts for all same-cluster pairs of `part`.
    void accumulate(const Partition& part);

    /// Sums another accumulator of the same order into this one.
    void merge(const ConsensusMatrix& other);

    const std::vector<std::uint16_t>& counts() const { return counts_; }

private:
    std::size_t order_ = 0;
    std::uint16_t runs_ = 0;
    std::vector<std::uint16_t> counts_;
};

}  // namespace dppc
