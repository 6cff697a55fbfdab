#include "dppc/consensus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "dppc/parallel.hpp"
#include "dppc/rng.hpp"

namespace dppc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}
}  // namespace

Partition compact_partition(std::vector<std::int32_t> raw) {
    Partition out;
    out.labels.resize(raw.size());
    std::int32_t next = 0;
    std::unordered_map<std::int32_t, std::int32_t> map;
    map.reserve(64);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto [it, fresh] = map.emplace(raw[i], next);
        if (fresh) ++next;
        out.labels[i] = it->second;
    }
    out.k = next;
    return out;
}

void ConsensusMatrix::accumulate(const Partition& part) {
    if (part.size() != order_) throw std::invalid_argument("ConsensusMatrix: partition order mismatch");
    if (runs_ == std::numeric_limits<std::uint16_t>::max())
        throw std::runtime_error("ConsensusMatrix: run counter saturated");
    std::vector<std::vector<std::uint32_t>> members(static_cast<std::size_t>(part.k));
    for (std::size_t i = 0; i < order_; ++i)
        members[static_cast<std::size_t>(part.labels[i])].push_back(static_cast<std::uint32_t>(i));
    for (const auto& cluster : members)
        for (std::size_t a = 0; a < cluster.size(); ++a)
            for (std::size_t b = a + 1; b < cluster.size(); ++b)
                ++counts_[pack(cluster[a], cluster[b])];
    ++runs_;
}

void ConsensusMatrix::merge(const ConsensusMatrix& other) {
    if (other.order_ != order_) throw std::invalid_argument("ConsensusMatrix: merge order mismatch");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] = static_cast<std::uint16_t>(counts_[i] + other.counts_[i]);
    runs_ = static_cast<std::uint16_t>(runs_ + other.runs_);
}

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::nngp: return "nngp";
        case Backend::submatrix: return "submatrix";
        case Backend::dense: return "dense";
        case Backend::uniform: return "uniform";
        case Backend::kmeanspp: return "kmeanspp";
    }
    return "unknown";
}

Backend backend_from_name(const std::string& name) {
    if (name == "nngp") return Backend::nngp;
    if (name == "submatrix") return Backend::submatrix;
    if (name == "dense") return Backend::dense;
    if (name == "uniform") return Backend::uniform;
    if (name == "kmeanspp") return Backend::kmeanspp;
    throw std::invalid_argument("unknown backend: " + name);
}

std::size_t ConsensusConfig::effective_min_cluster_size(std::size_t n) const {
    if (min_size_override > 0) return min_size_override;
    return static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), min_cluster_exponent)));
}

void ConsensusConfig::validate(std::size_t n) const {
    if (runs < 1 || runs > 65535) throw std::invalid_argument("ConsensusConfig: runs must lie in [1, 65535]");
    if (!(tau >= 0.0 && tau < 1.0)) throw std::invalid_argument("ConsensusConfig: tau must lie in [0, 1)");
    if (n_thresholds < 1) throw std::invalid_argument("ConsensusConfig: n_thresholds must be >= 1");
    if (!(min_cluster_exponent > 0.0 && min_cluster_exponent < 1.0))
        throw std::invalid_argument("ConsensusConfig: min_cluster_exponent must lie in (0, 1)");
    if (backend == Backend::submatrix) {
        std::size_t r = r_override ? r_override
                                   : static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(n)));
        if (r < 2 || r > n) throw std::invalid_argument("ConsensusConfig: submatrix size out of range");
        double g = static_cast<double>(r) / static_cast<double>(n);
        double M = std::floor(1.0 / (g * g * g) / 2.0);
        // eigendecomposition budget must beat the dense path
        if (!(M * std::pow(static_cast<double>(r), 3.0) < std::pow(static_cast<double>(n), 3.0)))
            throw std::invalid_argument("ConsensusConfig: submatrix budget M r^3 < n^3 violated");
    }
}

Partition voronoi_partition(const Dataset& data, const std::vector<std::size_t>& centers) {
    if (centers.empty()) throw std::invalid_argument("voronoi_partition: need at least one center");
    std::vector<std::int32_t> raw(data.n);
    for (std::size_t i = 0; i < data.n; ++i) {
        std::int32_t best = 0;
        double best_d = data.squared_distance(i, centers[0]);
        for (std::size_t c = 1; c < centers.size(); ++c) {
            double d = data.squared_distance(i, centers[c]);
            if (d < best_d) {
                best_d = d;
                best = static_cast<std::int32_t>(c);
            }
        }
        raw[i] = best;
    }
    return compact_partition(std::move(raw));
}

namespace {

LanczosConfig lanczos_config_for(const ConsensusConfig& cfg, std::size_t t) {
    LanczosConfig lc;
    lc.t = t;
    lc.tol = 1e-8;
    lc.max_restarts = 300;
    lc.seed = splitmix64(cfg.seed ^ 0x4c414e43ULL);
    return lc;
}

double expected_card_of(const std::vector<double>& values) {
    double e = 0.0;
    for (double v : values) {
        double l = std::max(0.0, v);
        e += l / (l + 1.0);
    }
    return e;
}

EigenPairs submatrix_pairs(const SymmetricDense& sub, const ConsensusConfig& cfg, std::size_t t_eff,
                           std::size_t knn_k) {
    if (cfg.submatrix_dense || knn_k >= sub.order()) {
        EigenPairs full = dense_eigh(sub, cfg.dense_cap);
        return t_eff < full.count() ? truncate(full, t_eff) : full;
    }
    SparseSym sparse = knn_sparsify(sub, knn_k);
    if (sub.order() <= cfg.dense_cap) {
        SymmetricDense dense = sparse.to_dense();
        dense.global_indices = sub.global_indices;
        EigenPairs full = dense_eigh(dense, cfg.dense_cap);
        return t_eff < full.count() ? truncate(full, t_eff) : full;
    }
    SparseOperator op(sparse);
    EigenPairs pairs = lanczos_topk(op, lanczos_config_for(cfg, t_eff));
    pairs.index_map = sub.global_indices;
    return pairs;
}

Partition kmeanspp_run(const Dataset& data, std::size_t k, std::size_t max_iter, std::mt19937_64& rng) {
    std::size_t n = data.n, p = data.p;
    k = std::max<std::size_t>(1, std::min(k, n));
    std::vector<double> centers(k * p);
    std::vector<double> d2(n, kInf);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // D^2 seeding
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::size_t c0 = first(rng);
    std::copy_n(data.row(c0), p, centers.begin());
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = 0.0;
            const double* prev = centers.data() + (c - 1) * p;
            for (std::size_t dd = 0; dd < p; ++dd) {
                double diff = data.row(i)[dd] - prev[dd];
                d += diff * diff;
            }
            d2[i] = std::min(d2[i], d);
            total += d2[i];
        }
        double u = unif(rng) * total;
        std::size_t pick = n - 1;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += d2[i];
            if (u < acc) {
                pick = i;
                break;
            }
        }
        std::copy_n(data.row(pick), p, centers.begin() + static_cast<std::ptrdiff_t>(c * p));
    }

    std::vector<std::int32_t> labels(n, -1), prev_labels(n, -2);
    std::vector<double> sums(k * p);
    std::vector<std::size_t> sizes(k);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            std::int32_t best = 0;
            double best_d = kInf;
            for (std::size_t c = 0; c < k; ++c) {
                double d = 0.0;
                const double* ctr = centers.data() + c * p;
                for (std::size_t dd = 0; dd < p; ++dd) {
                    double diff = data.row(i)[dd] - ctr[dd];
                    d += diff * diff;
                }
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<std::int32_t>(c);
                }
            }
            labels[i] = best;
        }
        if (labels == prev_labels) break;
        prev_labels = labels;
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(sizes.begin(), sizes.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto c = static_cast<std::size_t>(labels[i]);
            ++sizes[c];
            for (std::size_t dd = 0; dd < p; ++dd) sums[c * p + dd] += data.row(i)[dd];
        }
        for (std::size_t c = 0; c < k; ++c)
            if (sizes[c] > 0)
                for (std::size_t dd = 0; dd < p; ++dd)
                    centers[c * p + dd] = sums[c * p + dd] / static_cast<double>(sizes[c]);
    }
    return compact_partition(std::move(labels));
}

}  // namespace

BackendContext prepare_backend(const Dataset& data, const ConsensusConfig& cfg) {
    cfg.validate(data.n);
    BackendContext ctx;
    ctx.bw = estimate_bandwidth(data);
    ctx.L = rbf_kernel(data, ctx.bw, cfg.threads);
    std::size_t n = data.n;

    switch (cfg.backend) {
        case Backend::nngp: {
            ctx.m = cfg.m_override ? cfg.m_override : m_for_sparseness(n, cfg.sparseness);
            double ridge = cfg.ridge >= 0.0 ? cfg.ridge : default_ridge(ctx.L);

            const Dataset* ordered = &data;
            Dataset permuted;
            const SymmetricDense* Lp = &ctx.L;
            SymmetricDense Lperm;
            if (cfg.permute_rows) {
                std::vector<std::size_t> perm(n);
                std::iota(perm.begin(), perm.end(), 0);
                auto rng = derive_stream(cfg.seed, 0x5045524dULL);
                std::shuffle(perm.begin(), perm.end(), rng);
                permuted = Dataset(n, data.p);
                for (std::size_t i = 0; i < n; ++i)
                    std::copy_n(data.row(perm[i]), data.p, permuted.row(i));
                Lperm = principal_submatrix(ctx.L, perm);
                ordered = &permuted;
                Lp = &Lperm;
            }
            auto sets = neighbor_sets(*ordered, ctx.m);
            NNGPFactor factor = build_factor(*Lp, sets, ridge, cfg.threads);
            ctx.achieved_sparseness =
                1.0 - static_cast<double>(precision_nnz_bound(n, ctx.m)) /
                          (static_cast<double>(n) * static_cast<double>(n));
            NNGPOperator op(std::move(factor));
            std::size_t t_eff = cfg.t ? std::min(cfg.t, n - 1) : n - 1;
            ctx.pairs = lanczos_topk(op, lanczos_config_for(cfg, t_eff));
            if (cfg.permute_rows) ctx.pairs.index_map = Lp->global_indices;
            ctx.expected_card = expected_card_of(ctx.pairs.values);
            break;
        }
        case Backend::dense: {
            ctx.pairs = dense_eigh(ctx.L, cfg.dense_cap);
            if (cfg.t && cfg.t < ctx.pairs.count()) ctx.pairs = truncate(ctx.pairs, cfg.t);
            ctx.expected_card = expected_card_of(ctx.pairs.values);
            break;
        }
        case Backend::submatrix: {
            ctx.r = cfg.r_override ? cfg.r_override
                                   : static_cast<std::size_t>(std::ceil(cfg.gamma * static_cast<double>(n)));
            double g = static_cast<double>(ctx.r) / static_cast<double>(n);
            ctx.M = static_cast<std::size_t>(std::floor(1.0 / (g * g * g) / 2.0));
            auto rng = derive_stream(cfg.seed, 0x5355424dULL);
            std::vector<std::size_t> pool(n);
            std::size_t t_eff = cfg.t ? std::min(cfg.t, ctx.r) : ctx.r;

            std::vector<std::vector<std::size_t>> index_sets(ctx.M);
            for (std::size_t s = 0; s < ctx.M; ++s) {
                std::iota(pool.begin(), pool.end(), 0);
                for (std::size_t i = 0; i < ctx.r; ++i) {
                    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
                    std::swap(pool[i], pool[pick(rng)]);
                }
                index_sets[s].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(ctx.r));
                std::sort(index_sets[s].begin(), index_sets[s].end());
            }
            if (!cfg.submatrix_dense) {
                if (cfg.knn_override) {
                    ctx.knn_k = cfg.knn_override;
                } else {
                    // calibrate once on the first submatrix; the paper fixes k
                    // per (gamma, sparseness) level
                    SymmetricDense probe = principal_submatrix(ctx.L, index_sets[0]);
                    ctx.knn_k = k_for_sparseness(probe, cfg.sparseness).k;
                }
            }
            ctx.sub_pairs.resize(ctx.M);
            parallel_for_blocks(ctx.M, cfg.threads, [&](std::size_t b, std::size_t e, unsigned) {
                for (std::size_t s = b; s < e; ++s) {
                    SymmetricDense sub = principal_submatrix(ctx.L, index_sets[s]);
                    ctx.sub_pairs[s] = submatrix_pairs(sub, cfg, t_eff, ctx.knn_k);
                }
            });
            double e = 0.0;
            for (const auto& sp : ctx.sub_pairs) e += expected_card_of(sp.values);
            ctx.expected_card = e / static_cast<double>(ctx.M);
            break;
        }
        case Backend::uniform:
        case Backend::kmeanspp: {
            if (cfg.centers_override) {
                ctx.centers = cfg.centers_override;
            } else {
                std::vector<double> values = dense_eigenvalues(ctx.L, cfg.dense_cap);
                ctx.expected_card = expected_card_of(values);
                ctx.centers = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::llround(ctx.expected_card)));
            }
            break;
        }
    }
    return ctx;
}

Partition run_backend(const Dataset& data, const BackendContext& ctx, const ConsensusConfig& cfg,
                      std::size_t run_index) {
    auto rng = derive_stream(cfg.seed, run_index);
    switch (cfg.backend) {
        case Backend::nngp:
        case Backend::dense: {
            DppSample s = sample_dpp(ctx.pairs, rng, cfg.dpp_min_size, cfg.dpp_max_attempts);
            return voronoi_partition(data, s.indices);
        }
        case Backend::submatrix: {
            std::uniform_int_distribution<std::size_t> pick(0, ctx.M - 1);
            std::size_t ik = pick(rng);
            DppSample s = sample_dpp(ctx.sub_pairs[ik], rng, cfg.dpp_min_size, cfg.dpp_max_attempts);
            return voronoi_partition(data, s.indices);
        }
        case Backend::uniform: {
            std::vector<std::size_t> pool(data.n);
            std::iota(pool.begin(), pool.end(), 0);
            std::size_t k = std::min(ctx.centers, data.n);
            for (std::size_t i = 0; i < k; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, data.n - 1);
                std::swap(pool[i], pool[pick(rng)]);
            }
            std::vector<std::size_t> centers(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
            std::sort(centers.begin(), centers.end());
            return voronoi_partition(data, centers);
        }
        case Backend::kmeanspp:
            return kmeanspp_run(data, ctx.centers, cfg.kmeans_max_iter, rng);
    }
    throw std::logic_error("run_backend: unhandled backend");
}

Partition partition_at_threshold(const ConsensusMatrix& C, double theta) {
    std::size_t n = C.order();
    std::vector<std::int32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::int32_t(std::int32_t)> find = [&](std::int32_t x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (C.value(i, j) >= theta) {
                auto ri = find(static_cast<std::int32_t>(i)), rj = find(static_cast<std::int32_t>(j));
                if (ri != rj) parent[static_cast<std::size_t>(std::max(ri, rj))] = std::min(ri, rj);
            }
    std::vector<std::int32_t> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = find(static_cast<std::int32_t>(i));
    return compact_partition(std::move(raw));
}

ThresholdScan threshold_scan(const ConsensusMatrix& C, const ConsensusConfig& cfg) {
    std::size_t n = C.order();
    std::uint16_t R = C.runs();
    if (R < 1) throw std::invalid_argument("threshold_scan: no runs accumulated");

    // distinct observed consensus values in (tau, 1), as raw counts
    auto min_count = static_cast<std::uint32_t>(std::floor(cfg.tau * R)) + 1;
    std::vector<std::uint64_t> histogram(static_cast<std::size_t>(R) + 1, 0);
    for (std::uint16_t c : C.counts()) ++histogram[c];
    std::vector<std::uint32_t> distinct;
    for (std::uint32_t c = min_count; c < R; ++c)
        if (histogram[c] > 0) distinct.push_back(c);

    ThresholdScan scan;
    if (distinct.empty()) {
        scan.no_values_above_tau = true;
        Partition all_one;
        all_one.labels.assign(n, 0);
        all_one.k = 1;
        scan.candidates.push_back({cfg.tau, std::move(all_one)});
        return scan;
    }

    std::vector<std::uint32_t> chosen;
    if (distinct.size() <= cfg.n_thresholds) {
        chosen = distinct;
    } else {
        for (std::size_t j = 0; j < cfg.n_thresholds; ++j) {
            double q = cfg.n_thresholds == 1
                           ? 0.0
                           : static_cast<double>(j) / static_cast<double>(cfg.n_thresholds - 1);
            auto idx = static_cast<std::size_t>(std::llround(q * static_cast<double>(distinct.size() - 1)));
            chosen.push_back(distinct[idx]);
        }
        chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
    }

    // bucket qualifying edges by count, then grow components as theta drops
    std::vector<std::vector<std::uint64_t>> buckets(static_cast<std::size_t>(R) + 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            std::uint16_t c = C.count(i, j);
            if (c >= min_count) buckets[c].push_back((static_cast<std::uint64_t>(i) << 32) | j);
        }

    std::vector<std::int32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::int32_t(std::int32_t)> find = [&](std::int32_t x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    auto unite = [&](std::size_t i, std::size_t j) {
        auto ri = find(static_cast<std::int32_t>(i)), rj = find(static_cast<std::int32_t>(j));
        if (ri != rj) parent[static_cast<std::size_t>(std::max(ri, rj))] = std::min(ri, rj);
    };

    std::uint32_t level = R;  // edges with count >= level already united
    for (auto it = chosen.rbegin(); it != chosen.rend(); ++it) {
        std::uint32_t c_star = *it;
        while (level > c_star) {
            --level;
            for (std::uint64_t key : buckets[level])
                unite(static_cast<std::size_t>(key >> 32), static_cast<std::size_t>(key & 0xffffffffULL));
        }
        std::vector<std::int32_t> raw(n);
        for (std::size_t i = 0; i < n; ++i) raw[i] = find(static_cast<std::int32_t>(i));
        scan.candidates.push_back(
            {static_cast<double>(c_star) / static_cast<double>(R), compact_partition(std::move(raw))});
    }
    std::reverse(scan.candidates.begin(), scan.candidates.end());
    return scan;
}

Partition merge_small(const ConsensusMatrix& C, const Partition& part, std::size_t min_size) {
    if (min_size < 1) throw std::invalid_argument("merge_small: min_size must be >= 1");
    std::size_t n = part.size();
    std::vector<std::int32_t> labels = part.labels;
    std::int32_t k = part.k;

    for (;;) {
        if (k <= 1) break;
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (auto l : labels) ++sizes[static_cast<std::size_t>(l)];
        std::int32_t victim = -1;
        std::size_t victim_size = min_size;
        for (std::int32_t c = 0; c < k; ++c)
            if (sizes[static_cast<std::size_t>(c)] < victim_size) {
                victim_size = sizes[static_cast<std::size_t>(c)];
                victim = c;
            }
        if (victim < 0) break;

        // strongest consensus tie from the victim cluster to the outside;
        // ties resolved toward the lexicographically smallest (i, j)
        std::uint32_t best_count = 0;
        std::size_t best_i = n, best_j = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] != victim) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (labels[j] == victim) continue;
                std::uint32_t c = C.count(std::min(i, j), std::max(i, j));
                if (c > best_count || (c == best_count && (i < best_i || (i == best_i && j < best_j)))) {
                    best_count = c;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        std::int32_t target = labels[best_j];
        for (auto& l : labels)
            if (l == victim) l = target;
        Partition compacted = compact_partition(std::move(labels));
        labels = std::move(compacted.labels);
        k = compacted.k;
    }
    Partition out;
    out.labels = std::move(labels);
    out.k = k;
    return out;
}

namespace {

constexpr double kLogFloor = 1e-300;

// Scatter is measured in the kernel's log metric, -log L_ij, which for the
// RBF kernel recovers squared Euclidean distances up to the 2 sigma^2 scale.
// Feature-space distances 2(1 - L_ij) saturate at large separations and wash
// out the within/between contrast that the selection depends on.
double log_metric(double lij) { return -std::log(std::max(lij, kLogFloor)); }

double total_log_scatter(const SymmetricDense& L) {
    std::size_t n = L.order();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) total += log_metric(L.at(i, j));
    return total / static_cast<double>(n);
}

// Within-cluster scatter sum_k (1/n_k) sum_{i<j in C_k} -log L_ij.
double within_log_scatter(const SymmetricDense& L, const Partition& part) {
    std::vector<std::vector<std::uint32_t>> members(static_cast<std::size_t>(part.k));
    for (std::size_t i = 0; i < part.size(); ++i)
        members[static_cast<std::size_t>(part.labels[i])].push_back(static_cast<std::uint32_t>(i));
    double within = 0.0;
    for (const auto& cluster : members) {
        double s = 0.0;
        for (std::size_t a = 0; a < cluster.size(); ++a)
            for (std::size_t b = a + 1; b < cluster.size(); ++b) s += log_metric(L.at(cluster[a], cluster[b]));
        within += s / static_cast<double>(cluster.size());
    }
    return within;
}

double scatter_ratio_index(double within, double total, std::size_t n, std::int32_t k) {
    if (k <= 1) return kInf;
    double between = total - within;
    if (!(between > 0.0)) return kInf;
    if (within <= 0.0) return 0.0;  // degenerate all-tight partition (e.g. singletons)
    // degree-of-freedom normalization; the bare ratio W/B decreases
    // monotonically with the cluster count and would always rank the finest
    // admissible configuration first
    double kd = static_cast<double>(k), nd = static_cast<double>(n);
    if (kd >= nd) return 0.0;
    return (within / (nd - kd)) / (between / (kd - 1.0));
}

}  // namespace

double validation_index(const SymmetricDense& L, const Partition& part) {
    return validation_index(L, part, total_log_scatter(L));
}

double validation_index(const SymmetricDense& L, const Partition& part, double total_scatter) {
    std::size_t n = part.size();
    if (L.order() != n) throw std::invalid_argument("validation_index: order mismatch");
    return scatter_ratio_index(within_log_scatter(L, part), total_scatter, n, part.k);
}

ClusteringResult consensus_cluster(const Dataset& data, const ConsensusConfig& cfg) {
    cfg.validate(data.n);
    ClusteringResult result;
    result.backend = cfg.backend;
    result.config = cfg;

    double t0 = now_seconds();
    BackendContext ctx = prepare_backend(data, cfg);
    result.prepare_seconds = now_seconds() - t0;
    result.expected_card = ctx.expected_card;
    result.M = ctx.M;
    result.r = ctx.r;
    result.knn_k = ctx.knn_k;
    result.m = ctx.m;

    t0 = now_seconds();
    ConsensusMatrix C(data.n);
    {
        unsigned workers = std::max(1u, cfg.threads);
        std::vector<ConsensusMatrix> partial(workers, ConsensusMatrix(data.n));
        parallel_for_blocks(cfg.runs, workers, [&](std::size_t b, std::size_t e, unsigned w) {
            for (std::size_t r = b; r < e; ++r) partial[w].accumulate(run_backend(data, ctx, cfg, r));
        });
        for (const auto& acc : partial) C.merge(acc);
    }
    result.runs_seconds = now_seconds() - t0;

    t0 = now_seconds();
    ThresholdScan scan = threshold_scan(C, cfg);
    result.no_values_above_tau = scan.no_values_above_tau;
    std::size_t min_size = cfg.effective_min_cluster_size(data.n);
    double total_scatter = total_log_scatter(ctx.L);

    double best_index = kInf;
    std::size_t argmin_pos = 0;
    bool have_finite = false;
    std::int32_t most_clusters = -1;
    std::size_t most_pos = 0;
    std::vector<Partition> merged(scan.candidates.size());
    std::vector<double> within(scan.candidates.size());
    for (std::size_t c = 0; c < scan.candidates.size(); ++c) {
        const auto& cand = scan.candidates[c];
        merged[c] = merge_small(C, cand.partition, min_size);
        within[c] = within_log_scatter(ctx.L, merged[c]);
        double idx = scatter_ratio_index(within[c], total_scatter, data.n, merged[c].k);
        result.per_threshold.push_back({cand.theta, cand.partition.k, merged[c].k, idx});
        if (idx < best_index) {
            best_index = idx;
            argmin_pos = c;
            have_finite = true;
        }
        if (merged[c].k > most_clusters) {
            most_clusters = merged[c].k;
            most_pos = c;
        }
    }

    std::size_t best_pos = argmin_pos;
    if (!have_finite) {
        result.all_candidates_degenerate = true;
        best_pos = most_pos;
    } else {
        // Selection over the candidate curve: per distinct cluster count keep
        // the lowest-scatter representative, then pick the count where the
        // per-cluster scatter drop rate collapses (the last significant knee).
        // A plain argmin of the per-candidate index is the fallback when the
        // curve is too short to expose a knee.
        std::vector<std::size_t> rep;
        for (std::size_t c = 0; c < scan.candidates.size(); ++c) {
            if (merged[c].k < 2) continue;
            bool found = false;
            for (auto& r : rep)
                if (merged[r].k == merged[c].k) {
                    found = true;
                    if (within[c] < within[r]) r = c;
                    break;
                }
            if (!found) rep.push_back(c);
        }
        std::sort(rep.begin(), rep.end(),
                  [&](std::size_t a, std::size_t b) { return merged[a].k < merged[b].k; });
        if (rep.size() >= 3) {
            double best_ratio = -1.0;
            for (std::size_t j = 1; j + 1 < rep.size(); ++j) {
                double k_prev = merged[rep[j - 1]].k, k_cur = merged[rep[j]].k, k_next = merged[rep[j + 1]].k;
                double drop_in = (within[rep[j - 1]] - within[rep[j]]) / (k_cur - k_prev);
                double drop_out = (within[rep[j]] - within[rep[j + 1]]) / (k_next - k_cur);
                double floor = 1e-9 * std::max(total_scatter, 1.0);
                drop_out = std::max(drop_out, floor);
                drop_in = std::max(drop_in, 0.0);
                double ratio = drop_in / drop_out;
                if (ratio > best_ratio) {
                    best_ratio = ratio;
                    best_pos = rep[j];
                }
            }
        }
    }
    result.final = std::move(merged[best_pos]);
    result.chosen_threshold = scan.candidates[best_pos].theta;
    result.index_value = result.per_threshold[best_pos].index;
    result.select_seconds = now_seconds() - t0;
    return result;
}

}  // namespace dppc
