#include "dppc/nngp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dppc/parallel.hpp"
#include "dppc/rng.hpp"

namespace dppc {

void NNGPOperator::apply(const double* x, double* y) const {
    const auto& f = factor_;
    std::size_t n = f.order;
    // u = (I-A)^{-T} x: backward substitution, scattered through rows of A
    std::vector<double> u(x, x + n);
    for (std::size_t j = n; j-- > 0;) {
        double uj = u[j];
        for (std::size_t k = f.row_ptr[j]; k < f.row_ptr[j + 1]; ++k) u[f.neighbors[k]] += f.a_values[k] * uj;
    }
    for (std::size_t i = 0; i < n; ++i) u[i] *= f.d[i];
    // y = (I-A)^{-1} u: forward substitution over rows
    for (std::size_t i = 0; i < n; ++i) {
        double acc = u[i];
        for (std::size_t k = f.row_ptr[i]; k < f.row_ptr[i + 1]; ++k) acc += f.a_values[k] * y[f.neighbors[k]];
        y[i] = acc;
    }
}

void NNGPOperator::apply_precision(const double* x, double* y) const {
    const auto& f = factor_;
    std::size_t n = f.order;
    // z = D^{-1} (I-A) x
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = x[i];
        for (std::size_t k = f.row_ptr[i]; k < f.row_ptr[i + 1]; ++k) acc -= f.a_values[k] * x[f.neighbors[k]];
        z[i] = acc / f.d[i];
    }
    // y = (I-A)^T z
    std::copy(z.begin(), z.end(), y);
    for (std::size_t j = 0; j < n; ++j) {
        double zj = z[j];
        for (std::size_t k = f.row_ptr[j]; k < f.row_ptr[j + 1]; ++k) y[f.neighbors[k]] -= f.a_values[k] * zj;
    }
}

std::vector<std::vector<std::uint32_t>> neighbor_sets(const Dataset& data, std::size_t m) {
    std::size_t n = data.n;
    if (m < 1 || m >= n) throw std::invalid_argument("neighbor_sets: require 1 <= m < n");
    std::vector<std::vector<std::uint32_t>> sets(n);
    std::vector<std::uint32_t> cand;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t preds = i;
        cand.resize(preds);
        std::iota(cand.begin(), cand.end(), 0u);
        if (preds > m) {
            auto closer = [&](std::uint32_t a, std::uint32_t b) {
                double da = data.squared_distance(i, a), db = data.squared_distance(i, b);
                if (da != db) return da < db;
                return a < b;
            };
            std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(m - 1), cand.end(), closer);
            cand.resize(m);
        }
        std::sort(cand.begin(), cand.end());
        sets[i] = cand;
    }
    return sets;
}

NNGPFactor build_factor(const SymmetricDense& L, const std::vector<std::vector<std::uint32_t>>& neighbors,
                        double ridge, unsigned threads) {
    std::size_t n = L.order();
    if (neighbors.size() != n) throw std::invalid_argument("build_factor: neighbor list size mismatch");
    if (ridge < 0.0) throw std::invalid_argument("build_factor: ridge must be nonnegative");

    NNGPFactor f;
    f.order = n;
    f.row_ptr.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint32_t j : neighbors[i])
            if (j >= i) throw std::invalid_argument("build_factor: neighbor index not a predecessor");
        f.m = std::max(f.m, neighbors[i].size());
        f.row_ptr[i + 1] = f.row_ptr[i] + neighbors[i].size();
    }
    f.neighbors.resize(f.row_ptr[n]);
    f.a_values.assign(f.row_ptr[n], 0.0);
    f.d.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        std::copy(neighbors[i].begin(), neighbors[i].end(), f.neighbors.begin() + static_cast<std::ptrdiff_t>(f.row_ptr[i]));

    std::vector<int> bad(std::max(1u, threads), 0);
    parallel_for_blocks(n, threads, [&](std::size_t b, std::size_t e, unsigned worker) {
        for (std::size_t i = b; i < e; ++i) {
            const auto& N = neighbors[i];
            auto q = static_cast<Eigen::Index>(N.size());
            double dii = L.at(i, i);
            if (q > 0) {
                Eigen::MatrixXd block(q, q);
                Eigen::VectorXd rhs(q);
                for (Eigen::Index a = 0; a < q; ++a) {
                    rhs(a) = L.at(N[static_cast<std::size_t>(a)], i);
                    for (Eigen::Index c = a; c < q; ++c) {
                        double v = L.at(N[static_cast<std::size_t>(a)], N[static_cast<std::size_t>(c)]);
                        block(a, c) = v;
                        block(c, a) = v;
                    }
                    block(a, a) += ridge;
                }
                Eigen::LLT<Eigen::MatrixXd> llt(block);
                if (llt.info() != Eigen::Success) {
                    bad[worker] = 1;
                    continue;
                }
                Eigen::VectorXd a = llt.solve(rhs);
                for (Eigen::Index c = 0; c < q; ++c)
                    f.a_values[f.row_ptr[i] + static_cast<std::size_t>(c)] = a(c);
                dii -= rhs.dot(a);
            }
            if (!(dii > 0.0)) {
                bad[worker] = 1;
                continue;
            }
            f.d[i] = dii;
        }
    });
    if (std::any_of(bad.begin(), bad.end(), [](int v) { return v != 0; }))
        throw std::runtime_error("build_factor: ill-conditioned kernel; increase ridge");
    return f;
}

double default_ridge(const SymmetricDense& L) {
    double diag = 0.0;
    for (std::size_t i = 0; i < L.order(); ++i) diag += L.at(i, i);
    return 1e-8 * diag / static_cast<double>(L.order());
}

std::vector<double> apply_operator(const NNGPOperator& op, const std::vector<double>& v) {
    std::vector<double> y(v.size());
    op.apply(v.data(), y.data());
    return y;
}

std::vector<double> apply_precision(const NNGPOperator& op, const std::vector<double>& v) {
    std::vector<double> y(v.size());
    op.apply_precision(v.data(), y.data());
    return y;
}

SparseSym precision_matrix(const NNGPFactor& f) {
    std::size_t n = f.order;
    struct Triplet {
        std::uint32_t r, c;
        double v;
    };
    std::vector<Triplet> tri;
    tri.reserve(f.row_ptr[n] * (f.m + 2));
    // row i of B = I - A has support {i} union N_i; P += B_i^T B_i / d_i
    std::vector<std::uint32_t> support;
    std::vector<double> coeff;
    for (std::size_t i = 0; i < n; ++i) {
        support.clear();
        coeff.clear();
        for (std::size_t k = f.row_ptr[i]; k < f.row_ptr[i + 1]; ++k) {
            support.push_back(f.neighbors[k]);
            coeff.push_back(-f.a_values[k]);
        }
        support.push_back(static_cast<std::uint32_t>(i));
        coeff.push_back(1.0);
        double inv_d = 1.0 / f.d[i];
        for (std::size_t a = 0; a < support.size(); ++a)
            for (std::size_t b = a; b < support.size(); ++b)
                tri.push_back({support[a], support[b], coeff[a] * coeff[b] * inv_d});
    }
    std::sort(tri.begin(), tri.end(), [](const Triplet& x, const Triplet& y) {
        return x.r != y.r ? x.r < y.r : x.c < y.c;
    });
    std::vector<std::vector<std::pair<std::uint32_t, double>>> upper(n);
    for (std::size_t k = 0; k < tri.size();) {
        std::size_t e = k;
        double sum = 0.0;
        while (e < tri.size() && tri[e].r == tri[k].r && tri[e].c == tri[k].c) sum += tri[e++].v;
        upper[tri[k].r].emplace_back(tri[k].c, sum);
        k = e;
    }
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [c, v] : upper[i]) {
            rows[i].emplace_back(c, v);
            if (c != i) rows[c].emplace_back(static_cast<std::uint32_t>(i), v);
        }
    for (auto& row : rows)
        std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return SparseSym::from_rows(n, rows);
}

std::size_t precision_nnz_bound(std::size_t n, std::size_t m) { return n * m * (m + 1) / 2 + n; }

std::size_t m_for_sparseness(std::size_t n, double sparseness) {
    if (!(sparseness > 0.0 && sparseness < 1.0))
        throw std::invalid_argument("m_for_sparseness: sparseness must lie in (0,1)");
    double nd = static_cast<double>(n);
    double target_pairs = (1.0 - sparseness) * nd - 1.0;  // m(m+1)/2 per row
    if (target_pairs < 1.0) return 1;
    double m = (-1.0 + std::sqrt(1.0 + 8.0 * target_pairs)) / 2.0;
    auto rounded = static_cast<std::size_t>(std::llround(m));
    return std::clamp<std::size_t>(rounded, 1, n - 1);
}

namespace {

// Predecessor neighbor sets from kernel values (descending), ties toward the
// smaller index; equivalent to Euclidean order for RBF kernels.
std::vector<std::vector<std::uint32_t>> kernel_predecessor_sets(const SymmetricDense& L, std::size_t m) {
    std::size_t n = L.order();
    std::vector<std::vector<std::uint32_t>> sets(n);
    std::vector<std::uint32_t> cand;
    for (std::size_t i = 0; i < n; ++i) {
        cand.resize(i);
        std::iota(cand.begin(), cand.end(), 0u);
        if (i > m) {
            auto better = [&](std::uint32_t a, std::uint32_t b) {
                double va = L.at(i, a), vb = L.at(i, b);
                if (va != vb) return va > vb;
                return a < b;
            };
            std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(m - 1), cand.end(), better);
            cand.resize(m);
        }
        std::sort(cand.begin(), cand.end());
        sets[i] = cand;
    }
    return sets;
}

std::vector<std::vector<std::uint32_t>> union_pattern(std::size_t n,
                                                      const std::vector<std::vector<std::uint32_t>>& sets) {
    std::vector<std::vector<std::uint32_t>> pattern(n);
    for (std::size_t i = 0; i < n; ++i) {
        pattern[i] = sets[i];
        pattern[i].push_back(static_cast<std::uint32_t>(i));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::uint32_t j : sets[i]) pattern[j].push_back(static_cast<std::uint32_t>(i));
    for (auto& row : pattern) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return pattern;
}

}  // namespace

SparseSym mnn_matrix(const SymmetricDense& L, std::size_t m_nn) {
    std::size_t n = L.order();
    if (m_nn < 1 || m_nn >= n) throw std::invalid_argument("mnn_matrix: require 1 <= m_nn < n");
    auto pattern = union_pattern(n, kernel_predecessor_sets(L, m_nn));
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].reserve(pattern[i].size());
        for (std::uint32_t j : pattern[i]) rows[i].emplace_back(j, L.at(i, j));
    }
    return SparseSym::from_rows(n, rows);
}

MnnSearch mnn_for_sparseness(const SymmetricDense& L, double target_sparseness) {
    if (!(target_sparseness > 0.0 && target_sparseness < 1.0))
        throw std::invalid_argument("mnn_for_sparseness: target must lie in (0,1)");
    std::size_t n = L.order();
    double total = static_cast<double>(n) * static_cast<double>(n);
    auto sparseness_at = [&](std::size_t m) {
        auto pattern = union_pattern(n, kernel_predecessor_sets(L, m));
        std::size_t nnz = 0;
        for (const auto& row : pattern) nnz += row.size();
        return 1.0 - static_cast<double>(nnz) / total;
    };
    double s1 = sparseness_at(1);
    if (s1 < target_sparseness) return {1, s1, true};
    std::size_t lo = 1, hi = n - 1;
    while (lo < hi) {
        std::size_t mid = lo + (hi - lo + 1) / 2;
        if (sparseness_at(mid) >= target_sparseness)
            lo = mid;
        else
            hi = mid - 1;
    }
    return {lo, sparseness_at(lo), false};
}

double frobenius_distance(const SymmetricDense& a, const SymmetricDense& b) {
    if (a.order() != b.order()) throw std::invalid_argument("frobenius_distance: order mismatch");
    double off = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < a.order(); ++i) {
        double d = a.at(i, i) - b.at(i, i);
        diag += d * d;
        for (std::size_t j = i + 1; j < a.order(); ++j) {
            double v = a.at(i, j) - b.at(i, j);
            off += v * v;
        }
    }
    return std::sqrt(diag + 2.0 * off);
}

double frobenius_distance(const SymmetricDense& a, const SparseSym& b) {
    if (a.order() != b.order()) throw std::invalid_argument("frobenius_distance: order mismatch");
    std::size_t n = a.order();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto k = b.row_ptr()[i];
        auto end = b.row_ptr()[i + 1];
        for (std::size_t j = 0; j < n; ++j) {
            double bv = 0.0;
            if (k < end && b.cols()[k] == j) bv = b.values()[k++];
            double d = a.at(i, j) - bv;
            sum += d * d;
        }
    }
    return std::sqrt(sum);
}

FrobeniusEstimate frobenius_distance(const SymmetricDense& a, const NNGPOperator& op,
                                     std::size_t sample_columns, std::uint64_t seed) {
    if (a.order() != op.order()) throw std::invalid_argument("frobenius_distance: order mismatch");
    std::size_t n = a.order();
    bool sampled = sample_columns > 0 && sample_columns < n;
    std::vector<std::size_t> cols(n);
    std::iota(cols.begin(), cols.end(), 0);
    if (sampled) {
        auto rng = derive_stream(seed, 0x4652);
        for (std::size_t i = 0; i < sample_columns; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n - 1);
            std::swap(cols[i], cols[pick(rng)]);
        }
        cols.resize(sample_columns);
    }
    std::vector<double> e(n, 0.0), col(n);
    double sum = 0.0;
    for (std::size_t j : cols) {
        e[j] = 1.0;
        op.apply(e.data(), col.data());
        e[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = a.at(i, j) - col[i];
            sum += d * d;
        }
    }
    if (sampled) sum *= static_cast<double>(n) / static_cast<double>(cols.size());
    return {std::sqrt(sum), sampled};
}

}  // namespace dppc
