#include "dppc/datagen.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dppc/rng.hpp"

namespace dppc {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

Eigen::MatrixXd to_eigen(const std::vector<double>& m, std::size_t p) {
    Eigen::MatrixXd out(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) out(i, j) = m[i * p + j];
    return out;
}

// Cached Cholesky view of one component; `scale` multiplies the covariance.
struct GaussComponent {
    Eigen::VectorXd mean;
    Eigen::MatrixXd chol;  // lower factor of the unscaled covariance
    double logdet = 0.0;   // of the unscaled covariance
    double log_weight = 0.0;
};

GaussComponent make_component(const MixtureModel& model, std::size_t k) {
    std::size_t p = model.p;
    GaussComponent c;
    c.mean = Eigen::Map<const Eigen::VectorXd>(model.means[k].data(), static_cast<Eigen::Index>(p));
    Eigen::LLT<Eigen::MatrixXd> llt(to_eigen(model.covariances[k], p));
    if (llt.info() != Eigen::Success) throw std::runtime_error("degenerate component");
    c.chol = llt.matrixL();
    c.logdet = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        double d = c.chol(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        if (!(d > 0.0)) throw std::runtime_error("degenerate component");
        c.logdet += 2.0 * std::log(d);
    }
    c.log_weight = std::log(model.weights[k]);
    return c;
}

double log_density(const GaussComponent& c, double scale, const Eigen::VectorXd& x) {
    auto p = x.size();
    Eigen::VectorXd diff = x - c.mean;
    // (scale*V)^{-1} quadratic form through the unscaled factor
    Eigen::VectorXd y = c.chol.triangularView<Eigen::Lower>().solve(diff);
    double quad = y.squaredNorm() / scale;
    double logdet = c.logdet + static_cast<double>(p) * std::log(scale);
    return -0.5 * (static_cast<double>(p) * kLogTwoPi + logdet + quad);
}

Eigen::VectorXd draw_point(const GaussComponent& c, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(c.mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return c.mean + std::sqrt(scale) * (c.chol * z);
}

// P(draw from `from` is classified as `to`) under the two-component Bayes
// rule; exact ties count 1/2.
double misclass_rate(const GaussComponent& from, const GaussComponent& to, double scale,
                     std::size_t draws, std::mt19937_64& rng) {
    double hits = 0.0;
    for (std::size_t s = 0; s < draws; ++s) {
        Eigen::VectorXd x = draw_point(from, scale, rng);
        double d = (to.log_weight + log_density(to, scale, x)) -
                   (from.log_weight + log_density(from, scale, x));
        if (d > 0.0)
            hits += 1.0;
        else if (d == 0.0)
            hits += 0.5;
    }
    return hits / static_cast<double>(draws);
}

double pair_overlap(const GaussComponent& a, const GaussComponent& b, double scale,
                    std::size_t draws, std::mt19937_64& rng) {
    return misclass_rate(a, b, scale, draws, rng) + misclass_rate(b, a, scale, draws, rng);
}

double overlap_stat(const std::vector<GaussComponent>& comps, double scale, OverlapStat stat,
                    std::size_t draws, std::mt19937_64& rng) {
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t k = 0; k + 1 < comps.size(); ++k) {
        for (std::size_t l = k + 1; l < comps.size(); ++l) {
            double w = pair_overlap(comps[k], comps[l], scale, draws, rng);
            if (stat == OverlapStat::max)
                acc = std::max(acc, w);
            else
                acc += w;
            ++pairs;
        }
    }
    if (stat == OverlapStat::average && pairs > 0) acc /= static_cast<double>(pairs);
    return acc;
}

std::vector<double> draw_weights(std::size_t K, std::mt19937_64& rng) {
    std::gamma_distribution<double> gamma(1.0, 1.0);
    std::vector<double> w(K);
    double sum = 0.0;
    for (auto& v : w) {
        v = gamma(rng);
        sum += v;
    }
    for (auto& v : w) v /= sum;
    return w;
}

std::vector<std::vector<double>> draw_means(std::size_t K, std::size_t p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> means(K, std::vector<double>(p));
    for (auto& m : means)
        for (auto& v : m) v = unif(rng);
    return means;
}

// Standard Wishart(I_p, p+1 df) via the Bartlett factor. Draws whose
// eccentricity sqrt(1 - lambda_min/lambda_max) exceeds the cap get their
// eigenvalue gaps shrunk so the eccentricity lands exactly on the cap,
// keeping the eigenvector basis.
std::vector<double> draw_wishart(std::size_t p, double max_eccentricity, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    double df = static_cast<double>(p) + 1.0;
    for (std::size_t i = 0; i < p; ++i) {
        std::gamma_distribution<double> gamma((df - static_cast<double>(i)) / 2.0, 2.0);
        A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = std::sqrt(gamma(rng));
        for (std::size_t j = 0; j < i; ++j)
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = normal(rng);
    }
    Eigen::MatrixXd W = A * A.transpose();
    if (max_eccentricity < 1.0 && p > 1) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
        Eigen::VectorXd lam = es.eigenvalues();
        double lmax = lam(lam.size() - 1), lmin = lam(0);
        double ecc2 = 1.0 - lmin / lmax;
        double cap2 = max_eccentricity * max_eccentricity;
        if (ecc2 > cap2) {
            double shrink = cap2 / ecc2;
            for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = lmax - (lmax - lam(i)) * shrink;
            W = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
        }
    }
    std::vector<double> out(p * p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) out[i * p + j] = W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
}

std::vector<std::size_t> draw_multinomial(std::size_t n, const std::vector<double>& weights,
                                          std::mt19937_64& rng) {
    std::discrete_distribution<std::size_t> cat(weights.begin(), weights.end());
    std::vector<std::size_t> counts(weights.size(), 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[cat(rng)];
    return counts;
}

// Bisection on log-scale for the covariance multiplier that brings the
// overlap statistic to the middle of the acceptance band. Overlap is
// monotone increasing in the scale, so a bracket always exists for
// distinct means.
double calibrate_scale(const std::vector<GaussComponent>& comps, const MixtureSpec& spec,
                       std::mt19937_64& rng) {
    double target = 0.5 * (spec.overlap_lo + spec.overlap_hi);
    std::size_t search_draws = std::max<std::size_t>(400, spec.overlap_mc_samples / 4);
    auto eval = [&](double c) {
        auto sub = derive_stream(rng(), 0);
        return overlap_stat(comps, c, spec.overlap_stat, search_draws, sub);
    };
    double lo = 1.0, hi = 1.0;
    double f = eval(1.0);
    if (f < target) {
        for (int i = 0; i < 80 && f < target; ++i) {
            hi *= 4.0;
            f = eval(hi);
        }
        lo = hi / 4.0;
    } else {
        for (int i = 0; i < 80 && f > target; ++i) {
            lo *= 0.25;
            f = eval(lo);
        }
        hi = lo * 4.0;
    }
    for (int it = 0; it < 24; ++it) {
        double mid = std::sqrt(lo * hi);
        if (eval(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

}  // namespace

std::size_t MixtureSpec::effective_min_size() const {
    if (min_component_size > 0) return min_component_size;
    return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
}

void MixtureSpec::validate() const {
    if (p < 1) throw std::invalid_argument("MixtureSpec: p must be >= 1");
    if (K < 1) throw std::invalid_argument("MixtureSpec: K must be >= 1");
    if (!(overlap_lo >= 0.0 && overlap_lo <= overlap_hi && overlap_hi <= 0.4))
        throw std::invalid_argument("MixtureSpec: require 0 <= overlap_lo <= overlap_hi <= 0.4");
    if (n < K * effective_min_size())
        throw std::invalid_argument("MixtureSpec: n too small for K components of minimum size");
}

MixtureModel draw_mixture_model(const MixtureSpec& spec, std::mt19937_64& rng) {
    spec.validate();
    MixtureModel model;
    model.p = spec.p;
    model.K = spec.K;
    model.means = draw_means(spec.K, spec.p, rng);
    model.covariances.reserve(spec.K);
    for (std::size_t k = 0; k < spec.K; ++k) model.covariances.push_back(draw_wishart(spec.p, spec.max_eccentricity, rng));
    model.weights = draw_weights(spec.K, rng);
    return model;
}

double estimate_pairwise_overlap(const MixtureModel& model, std::size_t k, std::size_t l,
                                 std::size_t mc_samples, std::mt19937_64& rng) {
    if (k == l) throw std::invalid_argument("estimate_pairwise_overlap: components must differ");
    if (k >= model.K || l >= model.K) throw std::invalid_argument("estimate_pairwise_overlap: component out of range");
    if (mc_samples < 100) throw std::invalid_argument("estimate_pairwise_overlap: need mc_samples >= 100");
    GaussComponent a = make_component(model, k);
    GaussComponent b = make_component(model, l);
    return pair_overlap(a, b, 1.0, mc_samples, rng);
}

double model_overlap(const MixtureModel& model, OverlapStat stat, std::size_t mc_samples,
                     std::mt19937_64& rng) {
    std::vector<GaussComponent> comps;
    comps.reserve(model.K);
    for (std::size_t k = 0; k < model.K; ++k) comps.push_back(make_component(model, k));
    return overlap_stat(comps, 1.0, stat, mc_samples, rng);
}

std::pair<MixtureModel, Dataset> generate_dataset(const MixtureSpec& spec, std::mt19937_64& rng) {
    spec.validate();
    std::size_t min_size = spec.effective_min_size();

    for (std::size_t attempt = 0; attempt < spec.model_draw_cap; ++attempt) {
        // Cheap rejections first: component sizes depend on the weights only,
        // and the rest of the model is drawn independently of them.
        std::vector<double> weights = draw_weights(spec.K, rng);
        std::vector<std::size_t> sizes = draw_multinomial(spec.n, weights, rng);
        if (std::any_of(sizes.begin(), sizes.end(), [&](std::size_t s) { return s < min_size; }))
            continue;

        MixtureModel model;
        model.p = spec.p;
        model.K = spec.K;
        model.weights = std::move(weights);
        model.means = draw_means(spec.K, spec.p, rng);
        model.covariances.reserve(spec.K);
        for (std::size_t k = 0; k < spec.K; ++k) model.covariances.push_back(draw_wishart(spec.p, spec.max_eccentricity, rng));

        double scale = 1.0;
        if (spec.K >= 2) {
            std::vector<GaussComponent> comps;
            comps.reserve(spec.K);
            for (std::size_t k = 0; k < spec.K; ++k) comps.push_back(make_component(model, k));
            scale = calibrate_scale(comps, spec, rng);
            auto check_rng = derive_stream(rng(), 1);
            double achieved =
                overlap_stat(comps, scale, spec.overlap_stat, spec.overlap_mc_samples, check_rng);
            if (achieved < spec.overlap_lo || achieved > spec.overlap_hi) continue;
        }
        for (auto& cov : model.covariances)
            for (auto& v : cov) v *= scale;

        Dataset data(spec.n, spec.p);
        data.labels.resize(spec.n);
        std::size_t row = 0;
        for (std::size_t k = 0; k < spec.K; ++k) {
            GaussComponent comp = make_component(model, k);
            for (std::size_t s = 0; s < sizes[k]; ++s, ++row) {
                Eigen::VectorXd x = draw_point(comp, 1.0, rng);
                for (std::size_t d = 0; d < spec.p; ++d) data.row(row)[d] = x(static_cast<Eigen::Index>(d));
                data.labels[row] = static_cast<std::int32_t>(k);
            }
        }
        data.validate();
        return {std::move(model), std::move(data)};
    }
    throw std::runtime_error("generate_dataset: overlap target infeasible");
}

std::pair<MixtureModel, Dataset> generate_dataset(const MixtureSpec& spec) {
    std::mt19937_64 rng(splitmix64(spec.seed));
    return generate_dataset(spec, rng);
}

}  // namespace dppc
