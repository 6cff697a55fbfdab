#pragma once

#include <string>
#include <vector>

#include "dppc/consensus.hpp"
#include "dppc/dataset.hpp"
#include "dppc/datagen.hpp"
#include "dppc/metrics.hpp"

namespace dppc {

/// One row per point, p numeric columns (x0..x{p-1}) and an optional
/// trailing `label` column. Floats carry 17 significant digits.
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(const std::string& path);

void write_model_json(const std::string& path, const MixtureModel& model);
MixtureModel read_model_json(const std::string& path);

/// point_index,cluster_id
void write_labels_csv(const std::string& path, const Partition& part);
Partition read_labels_csv(const std::string& path);

void write_result_json(const std::string& path, const ClusteringResult& result);

/// method,log_pmf rows for the diversity histograms.
void write_diversity_csv(const std::string& path, const std::vector<double>& dpp,
                         const std::vector<double>& uniform);

void write_density_csv(const std::string& path, const DensityEstimate& d);

std::string config_to_json_string(const ConsensusConfig& cfg);

struct RunManifest {
    std::string command;
    std::string config_json;  // echo of the effective configuration
    std::uint64_t seed = 0;
    std::string version;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<TimingRecord> timings;
    unsigned threads = 1;
};

void write_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace dppc
