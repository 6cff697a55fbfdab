#include "dppc/eigen_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dppc {

namespace {

Eigen::MatrixXd materialize(const SymmetricDense& M) {
    auto n = static_cast<Eigen::Index>(M.order());
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            double v = M.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            A(i, j) = v;
            A(j, i) = v;
        }
    return A;
}

// One explicit shifted QR step on the (tridiagonal) projection T, with the
// step's orthogonal factor accumulated into Q. By the implicit-Q theorem the
// result matches the implicit bulge-chase update.
void shifted_qr_step(Eigen::MatrixXd& T, Eigen::MatrixXd& Q, double mu, Eigen::Index m) {
    Eigen::MatrixXd R = T.topLeftCorner(m, m);
    for (Eigen::Index i = 0; i < m; ++i) R(i, i) -= mu;
    std::vector<std::pair<double, double>> rot(static_cast<std::size_t>(m > 0 ? m - 1 : 0));
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        double a = R(i, i), b = R(i + 1, i);
        double r = std::hypot(a, b);
        double c = 1.0, s = 0.0;
        if (r > 0.0) {
            c = a / r;
            s = b / r;
        }
        rot[static_cast<std::size_t>(i)] = {c, s};
        for (Eigen::Index j = i; j < m; ++j) {
            double x = R(i, j), y = R(i + 1, j);
            R(i, j) = c * x + s * y;
            R(i + 1, j) = -s * x + c * y;
        }
    }
    // T <- R * Qstep + mu I, Q <- Q * Qstep with Qstep = G_0^T G_1^T ...
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        auto [c, s] = rot[static_cast<std::size_t>(i)];
        for (Eigen::Index r = 0; r < m; ++r) {
            double x = R(r, i), y = R(r, i + 1);
            R(r, i) = c * x + s * y;
            R(r, i + 1) = -s * x + c * y;
        }
        for (Eigen::Index r = 0; r < Q.rows(); ++r) {
            double x = Q(r, i), y = Q(r, i + 1);
            Q(r, i) = c * x + s * y;
            Q(r, i + 1) = -s * x + c * y;
        }
    }
    for (Eigen::Index i = 0; i < m; ++i) R(i, i) += mu;
    // the update is tridiagonal in exact arithmetic; clip the numerical fill
    Eigen::MatrixXd sym = 0.5 * (R + R.transpose());
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            if (std::abs(i - j) > 1) sym(i, j) = 0.0;
    T.topLeftCorner(m, m) = sym;
}

}  // namespace

EigenPairs dense_eigh(const SymmetricDense& M, std::size_t dense_cap) {
    std::size_t n = M.order();
    if (n == 0) throw std::invalid_argument("dense_eigh: empty matrix");
    if (n > dense_cap) throw std::invalid_argument("dense_eigh: order exceeds dense cap");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(materialize(M));
    if (es.info() != Eigen::Success) throw std::runtime_error("dense_eigh: eigensolver did not converge");
    EigenPairs out;
    out.source_order = n;
    out.index_map = M.global_indices;
    out.values.resize(n);
    out.vectors.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        auto src = static_cast<Eigen::Index>(n - 1 - i);  // ascending -> descending
        out.values[i] = es.eigenvalues()(src);
        Eigen::Map<Eigen::VectorXd>(out.vector(i), static_cast<Eigen::Index>(n)) = es.eigenvectors().col(src);
    }
    return out;
}

std::vector<double> dense_eigenvalues(const SymmetricDense& M, std::size_t dense_cap) {
    std::size_t n = M.order();
    if (n == 0) throw std::invalid_argument("dense_eigenvalues: empty matrix");
    if (n > dense_cap) throw std::invalid_argument("dense_eigenvalues: order exceeds dense cap");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(materialize(M), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense_eigenvalues: eigensolver did not converge");
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = es.eigenvalues()(static_cast<Eigen::Index>(n - 1 - i));
    return vals;
}

EigenPairs lanczos_topk(const LinearOperator& op, const LanczosConfig& cfg) {
    const auto n = static_cast<Eigen::Index>(op.order());
    const auto t = static_cast<Eigen::Index>(cfg.t);
    if (t < 1) throw std::invalid_argument("lanczos_topk: t must be >= 1");
    if (cfg.tol <= 0.0) throw std::invalid_argument("lanczos_topk: tol must be positive");
    Eigen::Index m = cfg.krylov_dim
                         ? static_cast<Eigen::Index>(cfg.krylov_dim)
                         : std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * t + 1, t + 20));
    if (!(t < m && m <= n)) throw std::invalid_argument("lanczos_topk: need t < krylov_dim <= n");

    const double eps = std::numeric_limits<double>::epsilon();
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    Eigen::MatrixXd V(n, m);
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd f(n), w(n);

    auto random_vector = [&]() {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
        return v;
    };

    // Lanczos three-term recurrence with two-pass reorthogonalization against
    // the whole stored basis; grows the factorization from k0 to k1 columns.
    auto extend = [&](Eigen::Index k0, Eigen::Index k1) {
        for (Eigen::Index j = k0; j < k1; ++j) {
            double beta = f.norm();
            if (j == 0) {
                V.col(0) = f / beta;
            } else if (beta > n * eps * std::max(1.0, T.topLeftCorner(j, j).norm())) {
                V.col(j) = f / beta;
                T(j, j - 1) = T(j - 1, j) = beta;
            } else {
                // invariant subspace found: continue in a fresh direction
                Eigen::VectorXd v = random_vector();
                for (int pass = 0; pass < 2; ++pass) v -= V.leftCols(j) * (V.leftCols(j).transpose() * v);
                V.col(j) = v / v.norm();
                T(j, j - 1) = T(j - 1, j) = 0.0;
            }
            op.apply(V.col(j).data(), w.data());
            if (j > 0) w -= T(j - 1, j) * V.col(j - 1);
            double alpha = V.col(j).dot(w);
            w -= alpha * V.col(j);
            for (int pass = 0; pass < 2; ++pass) {
                Eigen::VectorXd h = V.leftCols(j + 1).transpose() * w;
                w -= V.leftCols(j + 1) * h;
                alpha += h(j);
            }
            T(j, j) = alpha;
            f = w;
        }
    };

    f = random_vector();
    extend(0, m);

    std::size_t restarts = 0;
    for (;;) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.topLeftCorner(m, m));
        if (es.info() != Eigen::Success) throw std::runtime_error("lanczos_topk: projected solve failed");
        const Eigen::VectorXd& theta = es.eigenvalues();  // ascending
        const Eigen::MatrixXd& S = es.eigenvectors();
        double beta_m = f.norm();
        double tnorm = std::max(std::abs(theta(0)), std::abs(theta(m - 1)));

        auto ritz_converged = [&](Eigen::Index asc_idx) {
            double bound = std::abs(beta_m * S(m - 1, asc_idx));
            return bound <= cfg.tol * std::max(std::abs(theta(asc_idx)), eps * tnorm);
        };
        Eigen::Index converged = 0;
        for (Eigen::Index i = 0; i < t; ++i)
            if (ritz_converged(m - 1 - i)) ++converged;

        auto collect = [&](Eigen::Index want, bool only_converged) {
            EigenPairs out;
            out.source_order = static_cast<std::size_t>(n);
            for (Eigen::Index i = 0; i < want; ++i) {
                Eigen::Index asc = m - 1 - i;
                if (only_converged && !ritz_converged(asc)) continue;
                out.values.push_back(theta(asc));
                Eigen::VectorXd x = V.leftCols(m) * S.col(asc);
                out.vectors.insert(out.vectors.end(), x.data(), x.data() + n);
            }
            return out;
        };

        if (converged == t) return collect(t, false);
        if (restarts >= cfg.max_restarts)
            throw LanczosError("lanczos_topk: max_restarts exceeded with unconverged pairs", collect(t, true));
        ++restarts;

        // keep a few extra directions once pairs start converging; shifts are
        // the remaining (smallest) unwanted Ritz values
        Eigen::Index keep = std::min<Eigen::Index>(m - 1, t + std::min<Eigen::Index>(converged, (m - t) / 2));
        Eigen::Index p = m - keep;
        Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(m, m);
        for (Eigen::Index i = 0; i < p; ++i) shifted_qr_step(T, Q, theta(i), m);

        Eigen::MatrixXd VQ = V.leftCols(m) * Q;
        Eigen::VectorXd f_new = VQ.col(keep) * T(keep, keep - 1) + f * Q(m - 1, keep - 1);
        V.leftCols(keep) = VQ.leftCols(keep);
        f = f_new;
        Eigen::MatrixXd Tk = T.topLeftCorner(keep, keep);
        T.setZero();
        T.topLeftCorner(keep, keep) = Tk;
        extend(keep, m);
    }
}

EigenPairs truncate(const EigenPairs& pairs, std::size_t t) {
    if (t > pairs.count()) throw std::invalid_argument("truncate: t exceeds available pairs");
    EigenPairs out;
    out.source_order = pairs.source_order;
    out.index_map = pairs.index_map;
    out.values.assign(pairs.values.begin(), pairs.values.begin() + static_cast<std::ptrdiff_t>(t));
    out.vectors.assign(pairs.vectors.begin(),
                       pairs.vectors.begin() + static_cast<std::ptrdiff_t>(t * pairs.source_order));
    return out;
}

}  // namespace dppc
