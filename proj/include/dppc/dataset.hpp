#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dppc {

/// n observations in R^p, row-major, with optional ground-truth labels.
struct Dataset {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<double> points;        // n*p, row-major
    std::vector<std::int32_t> labels;  // empty or size n

    Dataset() = default;
    Dataset(std::size_t n_, std::size_t p_) : n(n_), p(p_), points(n_ * p_, 0.0) {}

    double* row(std::size_t i) { return points.data() + i * p; }
    const double* row(std::size_t i) const { return points.data() + i * p; }

    bool has_labels() const { return !labels.empty(); }

    double squared_distance(std::size_t i, std::size_t j) const {
        const double* a = row(i);
        const double* b = row(j);
        double s = 0.0;
        for (std::size_t d = 0; d < p; ++d) {
            double diff = a[d] - b[d];
            s += diff * diff;
        }
        return s;
    }

    void validate() const {
        if (points.size() != n * p) throw std::invalid_argument("Dataset: points size mismatch");
        if (!labels.empty() && labels.size() != n) throw std::invalid_argument("Dataset: labels size mismatch");
        for (double v : points)
            if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite entry");
    }
};

}  // namespace dppc
