#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "dppc/dataset.hpp"

namespace dppc {

enum class OverlapStat { average, max };

struct MixtureSpec {
    std::size_t p = 2;
    std::size_t K = 2;
    std::size_t n = 100;
    double overlap_lo = 0.001;
    double overlap_hi = 0.01;
    std::size_t min_component_size = 0;  // 0 selects ceil(sqrt(n))
    std::uint64_t seed = 0;
    OverlapStat overlap_stat = OverlapStat::average;
    std::size_t overlap_mc_samples = 2000;
    std::size_t model_draw_cap = 1000;
    double max_eccentricity = 0.9;  // Wishart draws above this are rescaled; >= 1 disables

    std::size_t effective_min_size() const;
    void validate() const;
};

struct MixtureModel {
    std::size_t p = 0;
    std::size_t K = 0;
    std::vector<std::vector<double>> means;        // K vectors of length p
    std::vector<std::vector<double>> covariances;  // K matrices, p*p row-major
    std::vector<double> weights;                   // sums to 1
};

/// Means uniform on the unit hypercube, covariances standard Wishart with
/// p+1 degrees of freedom (Bartlett construction), weights symmetric
/// Dirichlet(1,...,1).
MixtureModel draw_mixture_model(const MixtureSpec& spec, std::mt19937_64& rng);

/// Monte Carlo estimate of the pairwise overlap omega_kl: the probability of
/// misclassifying a draw from component k as l plus the reverse, under the
/// two-component Bayes rule with the model's weights. Exact density ties
/// count as half a misclassification.
double estimate_pairwise_overlap(const MixtureModel& model, std::size_t k, std::size_t l,
                                 std::size_t mc_samples, std::mt19937_64& rng);

/// Overlap statistic (average or max over component pairs) at the model's
/// covariance scale.
double model_overlap(const MixtureModel& model, OverlapStat stat, std::size_t mc_samples,
                     std::mt19937_64& rng);

/// Draws mixture models until the overlap statistic lands in
/// [overlap_lo, overlap_hi] and every multinomial component size reaches the
/// minimum; a common scale factor on the covariances is calibrated per model
/// to make the overlap band reachable. Throws "overlap target infeasible"
/// once the model-draw cap is exhausted.
std::pair<MixtureModel, Dataset> generate_dataset(const MixtureSpec& spec, std::mt19937_64& rng);

/// Convenience entry point seeding the stream from spec.seed.
std::pair<MixtureModel, Dataset> generate_dataset(const MixtureSpec& spec);

}  // namespace dppc
