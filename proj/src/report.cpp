#include "structdiv/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>

#include "structdiv/errors.hpp"

namespace structdiv {

using nlohmann::json;

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

json read_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw IoError(std::string("cannot open ") + what + ": " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + " " + path + ": " + e.what());
    }
}

}  // namespace

std::vector<MetricRow> ScoreReport::rows() const {
    std::vector<MetricRow> out;
    for (const auto& p : point_metrics) {
        MetricRow row{p.metric_id, p.value, 0.0};
        for (const auto& b : bootstrap_metrics)
            if (b.metric_id == p.metric_id) {
                row.mean = b.mean;
                row.stderr_ = b.stderr_;
            }
        out.push_back(std::move(row));
    }
    return out;
}

json ScoreReport::to_json() const {
    json pm = json::array();
    for (const auto& m : point_metrics) pm.push_back(m.to_json());
    json bm = json::array();
    for (const auto& b : bootstrap_metrics) bm.push_back(b.to_json());
    return {{"label", label},       {"config", config_echo}, {"k", k},
            {"d", d},               {"point_metrics", pm},   {"bootstrap_metrics", bm},
            {"notices", notices}};
}

ScoreReport ScoreReport::from_json(const json& j) {
    ScoreReport r;
    try {
        r.label = j.at("label").get<std::string>();
        r.config_echo = j.at("config");
        r.k = j.at("k").get<std::uint32_t>();
        r.d = j.at("d").get<std::uint32_t>();
        for (const auto& jm : j.at("point_metrics")) {
            MetricResult m;
            m.metric_id = jm.at("metric_id").get<std::string>();
            m.value = jm.at("value").get<double>();
            m.n = jm.at("n").get<std::uint32_t>();
            m.k = jm.at("k").get<std::uint32_t>();
            m.pair_domain = pair_domain_from_string(jm.at("pair_domain").get<std::string>());
            m.log_base = log_base_from_string(jm.at("log_base").get<std::string>());
            m.pair_domain_size = jm.value("pair_domain_size", std::uint64_t{0});
            if (jm.contains("debug") && jm["debug"].contains("overlap_similarity"))
                m.debug_similarity = jm["debug"]["overlap_similarity"].get<double>();
            r.point_metrics.push_back(std::move(m));
        }
        for (const auto& jb : j.at("bootstrap_metrics")) {
            BootstrapResult b;
            b.metric_id = jb.at("metric_id").get<std::string>();
            b.mean = jb.at("mean").get<double>();
            b.stderr_ = jb.at("stderr").get<double>();
            b.iterations = jb.at("iterations").get<std::uint32_t>();
            b.subsample_size = jb.at("subsample_size").get<std::uint32_t>();
            b.seed = jb.at("seed").get<std::uint64_t>();
            b.with_replacement = jb.at("with_replacement").get<bool>();
            b.per_iteration_values = jb.at("per_iteration_values").get<std::vector<double>>();
            r.bootstrap_metrics.push_back(std::move(b));
        }
        for (const auto& n : j.at("notices")) r.notices.push_back(n.get<std::string>());
    } catch (const json::exception& e) {
        throw SchemaMismatchError(std::string("score report: ") + e.what());
    }
    return r;
}

ScoreReport ScoreReport::load(const std::string& path) {
    return from_json(read_json_file(path, "score report"));
}

std::string ScoreReport::to_csv() const {
    std::string out = "metric,mean,stderr\n";
    for (const auto& row : rows())
        out += row.metric_id + "," + fmt(row.mean) + "," + fmt(row.stderr_) + "\n";
    return out;
}

json RunManifest::to_json() const {
    return {{"strategy", strategy},   {"chain_path", chain_path}, {"chain_name", chain_name},
            {"k", k},                 {"seed", seed},             {"llm", llm},
            {"pdc", pdc},             {"stub_path", stub_path},   {"cache_path", cache_path},
            {"out_path", out_path},   {"created_at", created_at}};
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    try {
        m.strategy = j.at("strategy").get<std::string>();
        m.chain_path = j.at("chain_path").get<std::string>();
        m.chain_name = j.value("chain_name", "");
        m.k = j.at("k").get<std::uint32_t>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.llm = j.at("llm");
        m.pdc = j.at("pdc");
        m.stub_path = j.value("stub_path", "");
        m.cache_path = j.value("cache_path", "");
        m.out_path = j.value("out_path", "");
        m.created_at = j.value("created_at", "");
    } catch (const json::exception& e) {
        throw SchemaMismatchError(std::string("run manifest: ") + e.what());
    }
    return m;
}

void RunManifest::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest: " + path);
    out << to_json().dump(2) << "\n";
}

RunManifest RunManifest::load(const std::string& path) {
    return from_json(read_json_file(path, "run manifest"));
}

void check_reports_comparable(const std::vector<ScoreReport>& reports) {
    if (reports.empty()) throw ValidationError("no reports to merge");
    const auto ids_of = [](const ScoreReport& r) {
        std::set<std::string> ids;
        for (const auto& row : r.rows()) ids.insert(row.metric_id);
        return ids;
    };
    const auto first_ids = ids_of(reports.front());
    const auto n_of = [](const ScoreReport& r) {
        return r.config_echo.contains("n") ? r.config_echo["n"].get<std::uint32_t>() : 0u;
    };
    for (const auto& r : reports) {
        if (ids_of(r) != first_ids)
            throw SchemaMismatchError("report \"" + r.label +
                                      "\" has a different metric set than \"" +
                                      reports.front().label + "\"");
        if (n_of(r) != n_of(reports.front()))
            throw SchemaMismatchError("report \"" + r.label + "\" uses n=" +
                                      std::to_string(n_of(r)) + " but \"" +
                                      reports.front().label + "\" uses n=" +
                                      std::to_string(n_of(reports.front())));
    }
}

std::string combined_csv(const std::vector<ScoreReport>& reports) {
    std::string out = "label,metric,mean,stderr\n";
    for (const auto& r : reports)
        for (const auto& row : r.rows())
            out += r.label + "," + row.metric_id + "," + fmt(row.mean) + "," + fmt(row.stderr_) +
                   "\n";
    return out;
}

namespace {

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                          "#59a14f", "#edc948", "#b07aa1", "#ff9da7"};

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_report_svg(const std::vector<ScoreReport>& reports) {
    check_reports_comparable(reports);

    std::vector<std::string> metric_ids;
    for (const auto& row : reports.front().rows()) metric_ids.push_back(row.metric_id);

    const int panel_w = 340, panel_h = 220;
    const int margin_l = 56, margin_b = 48, margin_t = 28, margin_r = 12;
    const int cols = 2;
    const int rows_n = (static_cast<int>(metric_ids.size()) + cols - 1) / cols;
    const int legend_h = 24 + 18 * static_cast<int>(reports.size());
    const int width = cols * panel_w + 20;
    const int height = rows_n * panel_h + legend_h + 20;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t mi = 0; mi < metric_ids.size(); ++mi) {
        const int px = static_cast<int>(mi % cols) * panel_w + 10;
        const int py = static_cast<int>(mi / cols) * panel_h + 10;
        const int plot_w = panel_w - margin_l - margin_r;
        const int plot_h = panel_h - margin_t - margin_b;

        double ymax = 0.0;
        std::vector<std::pair<double, double>> bars;  // mean, stderr
        for (const auto& r : reports) {
            for (const auto& row : r.rows())
                if (row.metric_id == metric_ids[mi]) {
                    bars.emplace_back(row.mean, row.stderr_);
                    ymax = std::max(ymax, row.mean + row.stderr_);
                }
        }
        if (ymax <= 0.0) ymax = 1.0;
        ymax *= 1.12;

        svg += "<text x=\"" + std::to_string(px + panel_w / 2) + "\" y=\"" +
               std::to_string(py + 16) + "\" text-anchor=\"middle\" font-size=\"13\">" +
               xml_escape(metric_ids[mi]) + "</text>\n";

        const int x0 = px + margin_l, y0 = py + margin_t;
        // axes
        svg += "<line x1=\"" + std::to_string(x0) + "\" y1=\"" + std::to_string(y0) +
               "\" x2=\"" + std::to_string(x0) + "\" y2=\"" + std::to_string(y0 + plot_h) +
               "\" stroke=\"black\"/>\n";
        svg += "<line x1=\"" + std::to_string(x0) + "\" y1=\"" + std::to_string(y0 + plot_h) +
               "\" x2=\"" + std::to_string(x0 + plot_w) + "\" y2=\"" +
               std::to_string(y0 + plot_h) + "\" stroke=\"black\"/>\n";
        // y ticks
        for (int t = 0; t <= 4; ++t) {
            const double v = ymax * t / 4.0;
            const int y = y0 + plot_h - static_cast<int>(std::lround(plot_h * t / 4.0));
            svg += "<line x1=\"" + std::to_string(x0 - 3) + "\" y1=\"" + std::to_string(y) +
                   "\" x2=\"" + std::to_string(x0) + "\" y2=\"" + std::to_string(y) +
                   "\" stroke=\"black\"/>\n";
            svg += "<text x=\"" + std::to_string(x0 - 6) + "\" y=\"" + std::to_string(y + 4) +
                   "\" text-anchor=\"end\" font-size=\"10\">" + fmt(v, "%.3g") + "</text>\n";
        }

        const int nb = static_cast<int>(bars.size());
        const double slot = static_cast<double>(plot_w) / nb;
        const double bw = slot * 0.64;
        for (int b = 0; b < nb; ++b) {
            const double cx = x0 + slot * (b + 0.5);
            const double bx = cx - bw / 2.0;
            const double h = plot_h * bars[static_cast<std::size_t>(b)].first / ymax;
            const double by = y0 + plot_h - h;
            svg += "<rect x=\"" + fmt(bx, "%.2f") + "\" y=\"" + fmt(by, "%.2f") + "\" width=\"" +
                   fmt(bw, "%.2f") + "\" height=\"" + fmt(h, "%.2f") + "\" fill=\"" +
                   kPalette[b % 8] + "\"/>\n";
            const double se = bars[static_cast<std::size_t>(b)].second;
            if (se > 0.0) {
                const double eh = plot_h * se / ymax;
                svg += "<line x1=\"" + fmt(cx, "%.2f") + "\" y1=\"" + fmt(by - eh, "%.2f") +
                       "\" x2=\"" + fmt(cx, "%.2f") + "\" y2=\"" + fmt(by + eh, "%.2f") +
                       "\" stroke=\"black\"/>\n";
                for (const double yy : {by - eh, by + eh})
                    svg += "<line x1=\"" + fmt(cx - 4, "%.2f") + "\" y1=\"" + fmt(yy, "%.2f") +
                           "\" x2=\"" + fmt(cx + 4, "%.2f") + "\" y2=\"" + fmt(yy, "%.2f") +
                           "\" stroke=\"black\"/>\n";
            }
        }
    }

    // legend
    const int ly = rows_n * panel_h + 24;
    svg += "<text x=\"14\" y=\"" + std::to_string(ly) + "\" font-size=\"12\">strategies:</text>\n";
    for (std::size_t r = 0; r < reports.size(); ++r) {
        const int y = ly + 16 + static_cast<int>(r) * 18;
        svg += "<rect x=\"18\" y=\"" + std::to_string(y - 10) +
               "\" width=\"12\" height=\"12\" fill=\"" + kPalette[r % 8] + "\"/>\n";
        svg += "<text x=\"36\" y=\"" + std::to_string(y) + "\" font-size=\"12\">" +
               xml_escape(reports[r].label) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace structdiv
