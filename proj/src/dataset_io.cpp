#include "dppc/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dppc {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

json timing_to_json(const TimingRecord& t) {
    return json{{"label", t.label}, {"seconds", t.seconds}, {"config", t.config_echo}};
}

}  // namespace

void write_dataset_csv(const std::string& path, const Dataset& data) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t d = 0; d < data.p; ++d) std::fprintf(out, d ? ",x%zu" : "x%zu", d);
    std::fprintf(out, data.has_labels() ? ",label\n" : "\n");
    for (std::size_t i = 0; i < data.n; ++i) {
        for (std::size_t d = 0; d < data.p; ++d)
            std::fprintf(out, d ? ",%.17g" : "%.17g", data.row(i)[d]);
        if (data.has_labels()) std::fprintf(out, ",%d", data.labels[i]);
        std::fputc('\n', out);
    }
    std::fclose(out);
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_line(line);
    bool has_label = !header.empty() && header.back() == "label";
    std::size_t p = header.size() - (has_label ? 1 : 0);
    if (p == 0) throw std::runtime_error("dataset has no feature columns: " + path);

    std::vector<double> points;
    std::vector<std::int32_t> labels;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::runtime_error("ragged row in dataset file: " + path);
        for (std::size_t d = 0; d < p; ++d) points.push_back(std::stod(fields[d]));
        if (has_label) labels.push_back(static_cast<std::int32_t>(std::stol(fields[p])));
        ++n;
    }
    Dataset data;
    data.n = n;
    data.p = p;
    data.points = std::move(points);
    data.labels = std::move(labels);
    data.validate();
    return data;
}

void write_model_json(const std::string& path, const MixtureModel& model) {
    json j{{"p", model.p},
           {"K", model.K},
           {"means", model.means},
           {"covariances", model.covariances},
           {"weights", model.weights}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

MixtureModel read_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    json j = json::parse(in);
    MixtureModel model;
    model.p = j.at("p").get<std::size_t>();
    model.K = j.at("K").get<std::size_t>();
    model.means = j.at("means").get<std::vector<std::vector<double>>>();
    model.covariances = j.at("covariances").get<std::vector<std::vector<double>>>();
    model.weights = j.at("weights").get<std::vector<double>>();
    return model;
}

void write_labels_csv(const std::string& path, const Partition& part) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    std::fprintf(out, "point_index,cluster_id\n");
    for (std::size_t i = 0; i < part.size(); ++i) std::fprintf(out, "%zu,%d\n", i, part.labels[i]);
    std::fclose(out);
}

Partition read_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty labels file: " + path);
    std::vector<std::pair<std::size_t, std::int32_t>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2) throw std::runtime_error("ragged row in labels file: " + path);
        rows.emplace_back(std::stoul(fields[0]), static_cast<std::int32_t>(std::stol(fields[1])));
    }
    std::vector<std::int32_t> labels(rows.size(), -1);
    for (const auto& [idx, lab] : rows) {
        if (idx >= labels.size()) throw std::runtime_error("point index out of range in: " + path);
        labels[idx] = lab;
    }
    for (auto l : labels)
        if (l < 0) throw std::runtime_error("missing point index in: " + path);
    return compact_partition(std::move(labels));
}

std::string config_to_json_string(const ConsensusConfig& cfg) {
    json j{{"runs", cfg.runs},
           {"tau", cfg.tau},
           {"n_thresholds", cfg.n_thresholds},
           {"min_cluster_exponent", cfg.min_cluster_exponent},
           {"backend", backend_name(cfg.backend)},
           {"sparseness", cfg.sparseness},
           {"t", cfg.t},
           {"gamma", cfg.gamma},
           {"m_override", cfg.m_override},
           {"r_override", cfg.r_override},
           {"knn_override", cfg.knn_override},
           {"submatrix_dense", cfg.submatrix_dense},
           {"centers_override", cfg.centers_override},
           {"permute_rows", cfg.permute_rows},
           {"ridge", cfg.ridge},
           {"dense_cap", cfg.dense_cap},
           {"min_size_override", cfg.min_size_override},
           {"dpp_min_size", cfg.dpp_min_size},
           {"dpp_max_attempts", cfg.dpp_max_attempts},
           {"seed", cfg.seed},
           {"threads", cfg.threads}};
    return j.dump();
}

void write_result_json(const std::string& path, const ClusteringResult& result) {
    json trace = json::array();
    for (const auto& row : result.per_threshold)
        trace.push_back(json{{"theta", row.theta},
                             {"k_before_merge", row.k_before_merge},
                             {"k_after_merge", row.k_after_merge},
                             {"index", std::isinf(row.index) ? json("inf") : json(row.index)}});
    std::vector<std::size_t> sizes(static_cast<std::size_t>(result.final.k), 0);
    for (auto l : result.final.labels) ++sizes[static_cast<std::size_t>(l)];
    json j{{"backend", backend_name(result.backend)},
           {"config", json::parse(config_to_json_string(result.config))},
           {"chosen_threshold", result.chosen_threshold},
           {"index_value", std::isinf(result.index_value) ? json("inf") : json(result.index_value)},
           {"k", result.final.k},
           {"cluster_sizes", sizes},
           {"per_threshold", trace},
           {"no_values_above_tau", result.no_values_above_tau},
           {"all_candidates_degenerate", result.all_candidates_degenerate},
           {"expected_card", result.expected_card},
           {"M", result.M},
           {"r", result.r},
           {"knn_k", result.knn_k},
           {"m", result.m},
           {"timings",
            json{{"prepare_seconds", result.prepare_seconds},
                 {"runs_seconds", result.runs_seconds},
                 {"select_seconds", result.select_seconds}}}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

void write_diversity_csv(const std::string& path, const std::vector<double>& dpp,
                         const std::vector<double>& uniform) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    std::fprintf(out, "method,log_pmf\n");
    for (double v : dpp) std::fprintf(out, "dpp,%.17g\n", v);
    for (double v : uniform) std::fprintf(out, "uniform,%.17g\n", v);
    std::fclose(out);
}

void write_density_csv(const std::string& path, const DensityEstimate& d) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    std::fprintf(out, "grid,density\n");
    for (std::size_t i = 0; i < d.grid.size(); ++i)
        std::fprintf(out, "%.17g,%.17g\n", d.grid[i], d.density[i]);
    std::fclose(out);
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    json timings = json::array();
    for (const auto& t : manifest.timings) timings.push_back(timing_to_json(t));
    json j{{"command", manifest.command},
           {"config", manifest.config_json.empty() ? json(nullptr) : json::parse(manifest.config_json)},
           {"seed", manifest.seed},
           {"version", manifest.version},
           {"inputs", manifest.inputs},
           {"outputs", manifest.outputs},
           {"timings", timings},
           {"threads", manifest.threads}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace dppc
