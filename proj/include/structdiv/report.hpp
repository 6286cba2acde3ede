#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "structdiv/bootstrap.hpp"
#include "structdiv/metrics.hpp"

namespace structdiv {

// One CSV row of a score report: bootstrap mean/stderr when bootstrapping
// ran, else the point value with stderr 0.
struct MetricRow {
    std::string metric_id;
    double mean = 0.0;
    double stderr_ = 0.0;
};

struct ScoreReport {
    std::string label;
    nlohmann::json config_echo;  // n, log base, pair domain, bootstrap + tokenizer settings
    std::uint32_t k = 0;
    std::uint32_t d = 0;
    std::vector<MetricResult> point_metrics;
    std::vector<BootstrapResult> bootstrap_metrics;
    std::vector<std::string> notices;

    std::vector<MetricRow> rows() const;
    nlohmann::json to_json() const;
    static ScoreReport from_json(const nlohmann::json& j);
    static ScoreReport load(const std::string& path);

    std::string to_csv() const;  // header: metric,mean,stderr
};

// Everything needed to re-execute a generation run byte-identically in stub
// mode; written next to each generated sample file.
struct RunManifest {
    std::string strategy;
    std::string chain_path;
    std::string chain_name;
    std::uint32_t k = 0;
    std::uint64_t seed = 0;
    nlohmann::json llm;  // LlmConfig echo, credential redacted
    nlohmann::json pdc;
    std::string stub_path;
    std::string cache_path;
    std::string out_path;
    std::string created_at;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static RunManifest load(const std::string& path);
};

// Grouped bar chart: one panel per metric, one bar per report, whiskers at
// mean +/- stderr. Plain SVG, no plotting dependency; output is a pure
// function of the inputs.
std::string render_report_svg(const std::vector<ScoreReport>& reports);

// Combined CSV across reports: label,metric,mean,stderr.
std::string combined_csv(const std::vector<ScoreReport>& reports);

// Reports must agree on n and on their metric-id sets to be comparable;
// throws SchemaMismatchError otherwise.
void check_reports_comparable(const std::vector<ScoreReport>& reports);

}  // namespace structdiv
