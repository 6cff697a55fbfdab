#include "dppc/dpp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dppc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log det via Cholesky with explicit pivot check; kNegInf on failure.
double cholesky_logdet(Eigen::MatrixXd& A) {
    auto n = A.rows();
    double logdet = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        double piv = A(j, j);
        for (Eigen::Index k = 0; k < j; ++k) piv -= A(j, k) * A(j, k);
        if (!(piv > 0.0)) return kNegInf;
        double root = std::sqrt(piv);
        logdet += 2.0 * std::log(root);
        A(j, j) = root;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double v = A(i, j);
            for (Eigen::Index k = 0; k < j; ++k) v -= A(i, k) * A(j, k);
            A(i, j) = v / root;
        }
    }
    return logdet;
}

double orthonormality_defect(const Eigen::MatrixXd& V, Eigen::Index cols) {
    if (cols == 0) return 0.0;
    Eigen::MatrixXd G = V.leftCols(cols).transpose() * V.leftCols(cols);
    G -= Eigen::MatrixXd::Identity(cols, cols);
    return G.cwiseAbs().maxCoeff();
}

}  // namespace

DppSample sample_dpp_traced(const EigenPairs& pairs, std::mt19937_64& rng, std::size_t min_size,
                            std::size_t max_attempts, std::vector<double>* step_defects) {
    const auto n = static_cast<Eigen::Index>(pairs.source_order);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(max_attempts, 1); ++attempt) {
        // phase 1: Bernoulli selection of eigenvectors
        std::vector<std::size_t> J;
        for (std::size_t i = 0; i < pairs.count(); ++i) {
            double lambda = std::max(0.0, pairs.values[i]);
            if (unif(rng) < lambda / (lambda + 1.0)) J.push_back(i);
        }
        if (J.size() < min_size) continue;

        Eigen::MatrixXd V(n, static_cast<Eigen::Index>(J.size()));
        for (std::size_t c = 0; c < J.size(); ++c)
            V.col(static_cast<Eigen::Index>(c)) =
                Eigen::Map<const Eigen::VectorXd>(pairs.vector(J[c]), n);

        // phase 2: sequential selection with coordinate elimination
        std::vector<std::size_t> picked;
        picked.reserve(J.size());
        Eigen::Index cols = V.cols();
        while (cols > 0) {
            Eigen::VectorXd mass(n);
            double total = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                double s = V.row(i).head(cols).squaredNorm();
                mass(i) = s;
                total += s;
            }
            double u = unif(rng) * total;
            Eigen::Index pick = n - 1;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += mass(i);
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
            picked.push_back(static_cast<std::size_t>(pick));

            // eliminate coordinate `pick` using the pivot column with the
            // largest |V(pick, c)|, then drop that column
            Eigen::Index pivot = 0;
            double best = -1.0;
            for (Eigen::Index c = 0; c < cols; ++c) {
                double a = std::abs(V(pick, c));
                if (a > best) {
                    best = a;
                    pivot = c;
                }
            }
            Eigen::VectorXd pcol = V.col(pivot);
            double pval = V(pick, pivot);
            V.col(pivot) = V.col(cols - 1);
            --cols;
            for (Eigen::Index c = 0; c < cols; ++c) V.col(c) -= (V(pick, c) / pval) * pcol;

            // modified Gram-Schmidt re-orthonormalization
            for (Eigen::Index c = 0; c < cols; ++c) {
                for (Eigen::Index q = 0; q < c; ++q) V.col(c) -= V.col(q).dot(V.col(c)) * V.col(q);
                V.col(c) /= V.col(c).norm();
            }
            if (step_defects) step_defects->push_back(orthonormality_defect(V, cols));
        }

        std::sort(picked.begin(), picked.end());
        DppSample out;
        if (!pairs.index_map.empty()) {
            out.indices.reserve(picked.size());
            for (std::size_t i : picked) out.indices.push_back(pairs.index_map[i]);
            std::sort(out.indices.begin(), out.indices.end());
        } else {
            out.indices = std::move(picked);
        }
        return out;
    }
    throw std::runtime_error("sample_dpp: DPP yields too few centers; spectrum too flat");
}

DppSample sample_dpp(const EigenPairs& pairs, std::mt19937_64& rng, std::size_t min_size,
                     std::size_t max_attempts) {
    return sample_dpp_traced(pairs, rng, min_size, max_attempts, nullptr);
}

double log_det_l_plus_i(const SymmetricDense& L) {
    auto n = static_cast<Eigen::Index>(L.order());
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            double v = L.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            A(i, j) = v;
            A(j, i) = v;
        }
    for (Eigen::Index i = 0; i < n; ++i) A(i, i) += 1.0;
    double ld = cholesky_logdet(A);
    if (ld == kNegInf) throw std::runtime_error("log_det_l_plus_i: L + I not positive definite");
    return ld;
}

double log_pmf_with_norm(const SymmetricDense& L, const std::vector<std::size_t>& Y, double log_norm) {
    auto k = static_cast<Eigen::Index>(Y.size());
    for (std::size_t i : Y)
        if (i >= L.order()) throw std::invalid_argument("log_pmf: index out of range");
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            sub(a, b) = L.at(Y[static_cast<std::size_t>(a)], Y[static_cast<std::size_t>(b)]);
    double ld = cholesky_logdet(sub);
    if (ld == kNegInf) return kNegInf;
    return ld - log_norm;
}

double log_pmf(const SymmetricDense& L, const std::vector<std::size_t>& Y) {
    return log_pmf_with_norm(L, Y, log_det_l_plus_i(L));
}

double log_pmf(const EigenPairs& pairs, const std::vector<std::size_t>& Y) {
    auto t = static_cast<Eigen::Index>(pairs.count());
    auto k = static_cast<Eigen::Index>(Y.size());
    double log_norm = 0.0;
    for (double lambda : pairs.values) log_norm += std::log1p(std::max(0.0, lambda));
    if (k == 0) return -log_norm;
    // rank-t minor through B = V_Y sqrt(Lambda)
    Eigen::MatrixXd B(k, t);
    for (Eigen::Index c = 0; c < t; ++c) {
        double s = std::sqrt(std::max(0.0, pairs.values[static_cast<std::size_t>(c)]));
        const double* vec = pairs.vector(static_cast<std::size_t>(c));
        for (Eigen::Index a = 0; a < k; ++a) B(a, c) = s * vec[Y[static_cast<std::size_t>(a)]];
    }
    Eigen::MatrixXd G = B * B.transpose();
    double ld = cholesky_logdet(G);
    if (ld == kNegInf) return kNegInf;
    return ld - log_norm;
}

CardinalityMoments cardinality_moments(const EigenPairs& pairs) {
    CardinalityMoments m;
    for (double lambda : pairs.values) {
        double l = std::max(0.0, lambda);
        double q = l / (l + 1.0);
        m.mean += q;
        m.variance += q / (l + 1.0);
    }
    return m;
}

DiversityDraws diversity_histogram(const SymmetricDense& L, const EigenPairs& pairs,
                                   std::size_t n_draws, bool size_matched, std::mt19937_64& rng) {
    if (n_draws < 1) throw std::invalid_argument("diversity_histogram: need n_draws >= 1");
    double log_norm = log_det_l_plus_i(L);
    CardinalityMoments moments = cardinality_moments(pairs);
    auto fixed_size = static_cast<std::size_t>(std::llround(moments.mean));
    std::size_t n = L.order();

    DiversityDraws out;
    out.dpp_log_pmf.reserve(n_draws);
    out.uniform_log_pmf.reserve(n_draws);
    std::vector<std::size_t> sizes(n_draws, fixed_size);
    for (std::size_t d = 0; d < n_draws; ++d) {
        DppSample s = sample_dpp(pairs, rng, 0, 1);
        if (size_matched) sizes[d] = s.indices.size();
        out.dpp_log_pmf.push_back(log_pmf_with_norm(L, s.indices, log_norm));
    }
    std::vector<std::size_t> pool(n);
    for (std::size_t d = 0; d < n_draws; ++d) {
        std::iota(pool.begin(), pool.end(), 0);
        std::size_t sz = std::min(sizes[d], n);
        for (std::size_t i = 0; i < sz; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        std::vector<std::size_t> Y(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(sz));
        std::sort(Y.begin(), Y.end());
        out.uniform_log_pmf.push_back(log_pmf_with_norm(L, Y, log_norm));
    }
    return out;
}

}  // namespace dppc
