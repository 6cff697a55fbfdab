#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dppc/consensus_types.hpp"
#include "dppc/dataset.hpp"
#include "dppc/dpp.hpp"
#include "dppc/eigen_solver.hpp"
#include "dppc/kernel.hpp"
#include "dppc/nngp.hpp"

namespace dppc {

enum class Backend { nngp, submatrix, dense, uniform, kmeanspp };

std::string backend_name(Backend b);
Backend backend_from_name(const std::string& name);

struct ConsensusConfig {
    std::size_t runs = 200;
    double tau = 0.3;
    std::size_t n_thresholds = 50;
    double min_cluster_exponent = 0.5;  // minimum cluster size n^exponent
    Backend backend = Backend::nngp;

    // backend parameters
    double sparseness = 0.8;        // nngp precision / submatrix pattern target
    std::size_t t = 25;             // extracted eigenpairs; 0 = full available spectrum
    double gamma = 0.05;            // submatrix: proportion of points per submatrix
    std::size_t m_override = 0;     // nngp: neighbor cap (0 = from sparseness)
    std::size_t r_override = 0;     // submatrix: size (0 = ceil(gamma n))
    std::size_t knn_override = 0;   // submatrix: neighbors (0 = from sparseness)
    bool submatrix_dense = false;   // keep submatrices dense (no kNN sparsification)
    std::size_t centers_override = 0;  // uniform/kmeanspp center count (0 = round E[card])
    bool permute_rows = false;      // random row order before the NNGP factor
    double ridge = -1.0;            // NNGP block ridge; negative = spec default
    std::size_t dense_cap = 4000;
    std::size_t min_size_override = 0;  // 0 = ceil(n^min_cluster_exponent)
    std::size_t dpp_min_size = 2;
    std::size_t dpp_max_attempts = 100;
    std::size_t kmeans_max_iter = 100;

    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate(std::size_t n) const;
    std::size_t effective_min_cluster_size(std::size_t n) const;
};

/// Everything a backend precomputes once: the kernel, and either one global
/// eigenpair set (nngp/dense), M per-submatrix sets (submatrix), or just a
/// center count (uniform/kmeanspp).
struct BackendContext {
    Bandwidth bw;
    SymmetricDense L;
    EigenPairs pairs;                   // nngp / dense
    std::vector<EigenPairs> sub_pairs;  // submatrix
    double expected_card = 0.0;
    std::size_t centers = 0;  // uniform / kmeanspp
    std::size_t M = 0, r = 0, knn_k = 0, m = 0;
    double achieved_sparseness = 0.0;
};

/// Nearest-center assignment over all points; ties go to the smaller center
/// (centers are ascending dataset indices). Nonempty cells are relabeled to
/// dense ids in center order.
Partition voronoi_partition(const Dataset& data, const std::vector<std::size_t>& centers);

BackendContext prepare_backend(const Dataset& data, const ConsensusConfig& cfg);

/// One run: backend-specific center draw (or k-means++ pass) followed by a
/// partition of all n points. Reproducible per run_index under a fixed seed.
Partition run_backend(const Dataset& data, const BackendContext& ctx, const ConsensusConfig& cfg,
                      std::size_t run_index);

struct ThresholdPartition {
    double theta = 0.0;
    Partition partition;
};

struct ThresholdScan {
    std::vector<ThresholdPartition> candidates;  // ascending theta
    bool no_values_above_tau = false;
};

/// Connected components of the friendship graph {(i,j): C_ij >= theta} for
/// a fixed theta.
Partition partition_at_threshold(const ConsensusMatrix& C, double theta);

/// Candidate thresholds are the distinct consensus values in (tau, 1); when
/// more than n_thresholds exist, evenly spaced quantiles of the distinct
/// values are used. Components are grown incrementally as theta decreases.
ThresholdScan threshold_scan(const ConsensusMatrix& C, const ConsensusConfig& cfg);

/// Single-linkage style repair: repeatedly merge the smallest under-sized
/// cluster into the cluster holding its strongest outside consensus tie,
/// until all clusters reach min_size or one cluster remains.
Partition merge_small(const ConsensusMatrix& C, const Partition& part, std::size_t min_size);

/// Kernel within/between scatter ratio (minimized), with scatter measured in
/// the kernel's log metric -log L_ij and normalized by degrees of freedom:
/// (W/(n-k)) / (B/(k-1)). Returns +infinity for one cluster or nonpositive
/// between-scatter, 0 for an all-tight (e.g. all-singleton) partition.
/// The two-argument overload accepts the precomputed total scatter
/// (1/n) sum_{i<j} -log L_ij.
double validation_index(const SymmetricDense& L, const Partition& part);
double validation_index(const SymmetricDense& L, const Partition& part, double total_scatter);

struct ThresholdTrace {
    double theta = 0.0;
    std::int32_t k_before_merge = 0;
    std::int32_t k_after_merge = 0;
    double index = 0.0;
};

struct ClusteringResult {
    Partition final;
    double chosen_threshold = 0.0;
    double index_value = 0.0;
    std::vector<ThresholdTrace> per_threshold;
    Backend backend = Backend::nngp;
    ConsensusConfig config;
    bool no_values_above_tau = false;
    bool all_candidates_degenerate = false;
    double expected_card = 0.0;
    std::size_t M = 0, r = 0, knn_k = 0, m = 0;
    double prepare_seconds = 0.0;
    double runs_seconds = 0.0;
    double select_seconds = 0.0;
};

/// Full pipeline: prepare, R runs, consensus accumulation, threshold scan,
/// small-cluster merging, and validation-index selection.
ClusteringResult consensus_cluster(const Dataset& data, const ConsensusConfig& cfg);

}  // namespace dppc
