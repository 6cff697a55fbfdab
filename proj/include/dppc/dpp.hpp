#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "dppc/eigen_solver.hpp"
#include "dppc/symmetric_dense.hpp"

namespace dppc {

struct DppSample {
    std::vector<std::size_t> indices;  // ascending global dataset indices
    std::optional<double> log_pmf;
};

struct CardinalityMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Two-phase spectral sampler: eigenindex i enters J independently with
/// probability lambda_i/(lambda_i+1), then |J| points are drawn sequentially
/// from the elementary DPP of the selected eigenvectors, eliminating the
/// chosen coordinate and re-orthonormalizing (modified Gram-Schmidt) after
/// every pick. The sample size equals |J|; draws smaller than min_size are
/// rejected and re-drawn from phase 1, up to max_attempts. With a truncated
/// spectrum (t < n) the target law is the DPP of the rank-t kernel.
DppSample sample_dpp(const EigenPairs& pairs, std::mt19937_64& rng, std::size_t min_size = 2,
                     std::size_t max_attempts = 100);

/// As sample_dpp, additionally recording max|V^T V - I| after each phase-2
/// elimination step.
DppSample sample_dpp_traced(const EigenPairs& pairs, std::mt19937_64& rng, std::size_t min_size,
                            std::size_t max_attempts, std::vector<double>* step_defects);

/// log det(L_Y) - log det(L + I). Returns -infinity when L_Y is numerically
/// singular (non-positive Cholesky pivot, no jitter applied).
double log_pmf(const SymmetricDense& L, const std::vector<std::size_t>& Y);

/// Truncated-spectrum variant: the kernel is the rank-t reconstruction and
/// the normalizer is sum_i log(lambda_i + 1) over the t extracted values.
double log_pmf(const EigenPairs& pairs, const std::vector<std::size_t>& Y);

/// log det(L + I), reusable across many log_pmf evaluations on the same L.
double log_det_l_plus_i(const SymmetricDense& L);
double log_pmf_with_norm(const SymmetricDense& L, const std::vector<std::size_t>& Y, double log_norm);

/// E[card] = sum lambda/(lambda+1), Var[card] = sum lambda/(lambda+1)^2.
/// Negative round-off values are clamped to zero.
CardinalityMoments cardinality_moments(const EigenPairs& pairs);

struct DiversityDraws {
    std::vector<double> dpp_log_pmf;
    std::vector<double> uniform_log_pmf;
};

/// n_draws DPP subsets against n_draws uniform subsets, both scored by the
/// exact log-pmf under L. Uniform sizes match the DPP draws when
/// size_matched is set, otherwise round(E[card]) throughout.
DiversityDraws diversity_histogram(const SymmetricDense& L, const EigenPairs& pairs,
                                   std::size_t n_draws, bool size_matched, std::mt19937_64& rng);

}  // namespace dppc
