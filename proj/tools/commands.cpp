#include "commands.hpp"

#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include <json.hpp>

#include "structdiv/bootstrap.hpp"
#include "structdiv/catalog.hpp"
#include "structdiv/chain.hpp"
#include "structdiv/combo.hpp"
#include "structdiv/extract.hpp"
#include "structdiv/kmeans.hpp"
#include "structdiv/llm.hpp"
#include "structdiv/metrics.hpp"
#include "structdiv/report.hpp"
#include "structdiv/samples.hpp"
#include "structdiv/strategy.hpp"
#include "structdiv/text_metrics.hpp"

namespace structdiv::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

LlmConfig llm_from_flags(const LlmFlags& f) {
    LlmConfig cfg;
    cfg.base_url = f.base_url;
    cfg.model = f.model;
    cfg.api_key_env = f.api_key_env;
    cfg.temperature = f.temperature;
    cfg.top_p = f.top_p;
    cfg.max_tokens = f.max_tokens;
    cfg.timeout_seconds = f.timeout;
    cfg.max_retries = f.max_retries;
    cfg.requests_per_minute = f.rpm;
    cfg.parallelism = f.parallelism;
    return cfg;
}

LlmConfig llm_from_json(const json& j) {
    LlmConfig cfg;
    cfg.base_url = j.value("base_url", "");
    cfg.model = j.value("model", "");
    cfg.temperature = j.value("temperature", 1.0);
    cfg.top_p = j.value("top_p", 1.0);
    cfg.max_tokens = j.value("max_tokens", 1024);
    cfg.api_key_env = j.value("api_key_env", "OPENAI_API_KEY");
    cfg.timeout_seconds = j.value("timeout_seconds", 60.0);
    cfg.max_retries = j.value("max_retries", 3);
    cfg.requests_per_minute = j.value("requests_per_minute", 60);
    cfg.parallelism = j.value("parallelism", 4);
    return cfg;
}

std::unique_ptr<Gateway> make_gateway(LlmConfig cfg, const std::string& stub_path,
                                      const std::string& cache_path) {
    auto cache = cache_path.empty() ? std::make_shared<ResponseCache>()
                                    : std::make_shared<ResponseCache>(cache_path);
    auto transport = stub_path.empty() ? make_http_transport(cfg)
                                       : make_stub_transport(load_stub_table(stub_path));
    if (!stub_path.empty()) cfg.requests_per_minute = 0;  // no I/O to throttle offline
    return std::make_unique<Gateway>(cfg, std::move(transport), system_clock(), std::move(cache));
}

std::string iso_now() {
    char buf[32];
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

int run_generate(GenerateOpts opts) {
    if (!opts.from_manifest.empty()) {
        const RunManifest m = RunManifest::load(opts.from_manifest);
        opts.strategy = m.strategy;
        opts.chain = m.chain_path;
        opts.k = m.k;
        opts.k_set = true;
        opts.seed = m.seed;
        if (opts.stub.empty()) opts.stub = m.stub_path;
        if (opts.out.empty()) opts.out = m.out_path;
        const LlmConfig cfg = llm_from_json(m.llm);
        opts.llm.base_url = cfg.base_url;
        opts.llm.model = cfg.model;
        opts.llm.api_key_env = cfg.api_key_env;
        opts.llm.temperature = cfg.temperature;
        opts.llm.top_p = cfg.top_p;
        opts.llm.max_tokens = cfg.max_tokens;
        opts.llm.timeout = cfg.timeout_seconds;
        opts.llm.max_retries = cfg.max_retries;
        opts.llm.rpm = cfg.requests_per_minute;
        opts.llm.parallelism = cfg.parallelism;
        opts.oversample = m.pdc.value("oversample", 300u);
        opts.clusters = m.pdc.value("clusters_k", 100u);
        opts.kmeans_max_iters = m.pdc.value("kmeans_max_iters", 100u);
        opts.kmeans_tolerance = m.pdc.value("kmeans_tolerance", 1e-6);
        if (opts.stub.empty())
            throw UsageError("manifest re-execution runs in stub mode; the manifest records no "
                             "stub table (pass --stub)");
    }

    if (opts.strategy.empty()) throw UsageError("--strategy is required");
    if (opts.chain.empty()) throw UsageError("--chain is required");
    if (!opts.k_set) throw UsageError("--k is required");
    if (opts.out.empty()) throw UsageError("--out is required");

    const Strategy strategy = strategy_from_string(opts.strategy);
    const ChainConfig chain = ChainConfig::load(opts.chain);
    validate_chain_for_strategy(strategy, chain);

    PdcConfig pdc;
    pdc.oversample = opts.oversample;
    pdc.clusters_k = opts.clusters;
    pdc.kmeans_max_iters = opts.kmeans_max_iters;
    pdc.kmeans_tolerance = opts.kmeans_tolerance;
    pdc.seed = opts.seed;

    if ((strategy == Strategy::CoSPdc || strategy == Strategy::RandomPdc) &&
        opts.k != pdc.clusters_k)
        throw UsageError("pdc strategies emit exactly --clusters samples; pass --k " +
                         std::to_string(pdc.clusters_k) + " or adjust --clusters");

    auto gateway = make_gateway(llm_from_flags(opts.llm), opts.stub, opts.cache);
    const SampleSet set = run_strategy(strategy, chain, opts.k, *gateway, pdc);
    save_samples(set, opts.out);

    RunManifest manifest;
    manifest.strategy = opts.strategy;
    manifest.chain_path = opts.chain;
    manifest.chain_name = chain.name;
    manifest.k = opts.k;
    manifest.seed = opts.seed;
    manifest.llm = gateway->config().to_json();
    manifest.pdc = pdc.to_json();
    manifest.stub_path = opts.stub;
    manifest.cache_path = opts.cache;
    manifest.out_path = opts.out;
    manifest.created_at = iso_now();
    manifest.save(opts.manifest.empty() ? opts.out + ".manifest.json" : opts.manifest);

    std::cerr << "wrote " << set.k() << " samples to " << opts.out << " ("
              << gateway->transport_calls() << " transport calls)\n";
    return 0;
}

int run_extract(const ExtractOpts& opts) {
    if (opts.samples.empty()) throw UsageError("--samples is required");
    if (opts.catalog.empty()) throw UsageError("--catalog is required");
    if (opts.out.empty()) throw UsageError("--out is required");

    auto catalog = std::make_shared<const FeatureCatalog>(load_catalog(opts.catalog));
    SampleSet set = load_samples(opts.samples, catalog);

    JudgeConfig judge;
    judge.llm = llm_from_flags(opts.llm);
    if (!opts.judge_config.empty()) {
        std::ifstream in(opts.judge_config);
        if (!in) throw IoError("cannot open judge config: " + opts.judge_config);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ParseError("judge config " + opts.judge_config + ": " + e.what());
        }
        if (j.contains("prompt_template")) judge.prompt_template = j["prompt_template"];
        if (j.contains("positive_markers"))
            judge.positive_markers = j["positive_markers"].get<std::vector<std::string>>();
        if (j.contains("negative_markers"))
            judge.negative_markers = j["negative_markers"].get<std::vector<std::string>>();
        if (j.contains("default_bit")) judge.default_bit = j["default_bit"];
        if (j.contains("llm")) judge.llm = llm_from_json(j["llm"]);
    }

    const bool any_judge =
        std::any_of(catalog->features.begin(), catalog->features.end(),
                    [](const FeatureDef& f) { return f.kind == ExtractorKind::LlmJudge; });
    std::unique_ptr<Gateway> gateway;
    if (any_judge) gateway = make_gateway(judge.llm, opts.stub, opts.cache);

    ExtractionOutput out = extract_features(set, catalog, judge, gateway.get());
    save_samples(out.set, opts.out);

    for (const auto& inc : out.incidents)
        std::cerr << "warning: unparseable judge answer for sample " << inc.sample << ", feature \""
                  << catalog->features[inc.feature].id << "\": \"" << inc.response
                  << "\" (defaulted to " << judge.default_bit << ")\n";
    feature_prevalence(out.set, &std::cerr);
    std::cerr << "wrote " << out.set.k() << " samples with features to " << opts.out << "\n";
    return 0;
}

int run_score(const ScoreOpts& opts) {
    if (opts.samples.empty()) throw UsageError("--samples is required");
    if (opts.out_dir.empty()) throw UsageError("--out is required");

    std::shared_ptr<const FeatureCatalog> catalog;
    if (!opts.catalog.empty())
        catalog = std::make_shared<const FeatureCatalog>(load_catalog(opts.catalog));
    SampleSet set = load_samples(opts.samples, catalog);
    if (set.k() == 0) throw Error("samples file is empty: " + opts.samples);

    if (!opts.embeddings.empty()) {
        load_embeddings_sidecar(set, opts.embeddings);
    } else if (opts.embed_endpoint && !set.all_embeddings_present()) {
        auto gateway = make_gateway(llm_from_flags(opts.llm), opts.stub, opts.cache);
        std::vector<std::string> texts;
        for (const auto& s : set.samples) texts.push_back(s.text);
        const EmbeddingMatrix emb = gateway->embed(texts);
        for (std::size_t i = 0; i < set.samples.size(); ++i) {
            const auto row = emb.row(i);
            set.samples[i].embedding = std::vector<float>(row.begin(), row.end());
        }
    }

    MetricConfig mcfg;
    mcfg.n = opts.n;
    mcfg.log_base = log_base_from_string(opts.log_base);
    mcfg.pair_domain = pair_domain_from_string(opts.pair_domain);
    mcfg.max_pairs = opts.max_pairs;
    mcfg.validate();
    const EnumerationBudget budget{opts.budget};
    TokenizerConfig tcfg;
    tcfg.mode = tokenizer_mode_from_string(opts.tokenizer_mode);
    tcfg.n = opts.ngram_n;

    BootstrapConfig bcfg;
    bcfg.iterations = opts.bootstrap_iters;
    bcfg.subsample_size = opts.subsample;
    bcfg.seed = opts.seed;
    bcfg.with_replacement = opts.with_replacement;

    ScoreReport report;
    report.label = !opts.label.empty() ? opts.label : fs::path(opts.samples).stem().string();
    report.k = set.k();
    report.d = set.effective_d();
    report.config_echo = {{"n", mcfg.n},
                          {"log_base", to_string(mcfg.log_base)},
                          {"pair_domain", to_string(mcfg.pair_domain)},
                          {"max_pairs", mcfg.max_pairs},
                          {"enumeration_budget", budget.max_generated_combos},
                          {"bootstrap",
                           {{"iterations", bcfg.iterations},
                            {"subsample_size", bcfg.subsample_size},
                            {"seed", bcfg.seed},
                            {"with_replacement", bcfg.with_replacement}}},
                          {"tokenizer", {{"mode", to_string(tcfg.mode)}, {"n", tcfg.n}}}};

    const bool run_bootstrap = opts.bootstrap_iters >= 1;
    const auto boot = [&](const std::string& id, const MetricFn& fn) {
        if (run_bootstrap) report.bootstrap_metrics.push_back(bootstrap(set, fn, bcfg, id));
    };

    if (set.all_features_present()) {
        auto points = all_structural_metrics(set, mcfg, budget);
        report.point_metrics.insert(report.point_metrics.end(), points.begin(), points.end());

        using StructuralFn = MetricResult (*)(const ComboCounts&, const MetricConfig&);
        const std::pair<const char*, StructuralFn> structural[] = {
            {"coverage", &coverage},
            {"weighted_surprisal", &weighted_surprisal},
            {"boosted_jaccard", &boosted_jaccard},
            {"dice", &dice_diversity},
            {"one_way_inclusion", &one_way_inclusion},
            {"weighted_overlap", &weighted_overlap}};
        for (const auto& [id, fn] : structural)
            boot(id, [&mcfg, &budget, fn](const SampleSet& s) {
                return fn(count_supports(s, mcfg.n, budget), mcfg).value;
            });

        if (!opts.dump_combos.empty()) {
            std::ofstream dump(opts.dump_combos);
            if (!dump) throw IoError("cannot write " + opts.dump_combos);
            count_supports(set, mcfg.n, budget).dump_csv(dump);
        }
    } else {
        report.notices.push_back("structural metrics skipped: samples have no extracted features");
    }

    {
        std::vector<std::string> texts;
        for (const auto& s : set.samples) texts.push_back(s.text);
        MetricResult m;
        m.metric_id = "ngram_entropy";
        m.value = ngram_entropy(texts, tcfg);
        m.n = tcfg.n;
        m.k = set.k();
        report.point_metrics.push_back(m);
        boot("ngram_entropy", [tcfg](const SampleSet& s) {
            std::vector<std::string> tx;
            for (const auto& r : s.samples) tx.push_back(r.text);
            return ngram_entropy(tx, tcfg);
        });
    }

    if (set.all_embeddings_present()) {
        MetricResult m;
        m.metric_id = "embedding_diversity";
        m.value = embedding_diversity(EmbeddingMatrix::from_set(set));
        m.k = set.k();
        report.point_metrics.push_back(m);
        boot("embedding_diversity", [](const SampleSet& s) {
            return embedding_diversity(EmbeddingMatrix::from_set(s));
        });
    } else {
        report.notices.push_back(
            "embedding diversity skipped: no embeddings available (provide --embeddings, inline "
            "embeddings, or --embed-endpoint)");
    }

    fs::create_directories(opts.out_dir);
    write_text_file((fs::path(opts.out_dir) / "report.json").string(),
                    report.to_json().dump(2) + "\n");
    write_text_file((fs::path(opts.out_dir) / "report.csv").string(), report.to_csv());

    for (const auto& notice : report.notices) std::cerr << "notice: " << notice << "\n";
    std::cerr << "wrote report to " << opts.out_dir << "\n";
    return 0;
}

int run_report(const ReportOpts& opts) {
    if (opts.inputs.empty()) throw UsageError("--inputs is required");
    if (opts.out.empty()) throw UsageError("--out is required");

    std::vector<ScoreReport> reports;
    for (const auto& path : opts.inputs) reports.push_back(ScoreReport::load(path));
    check_reports_comparable(reports);

    write_text_file(opts.out, render_report_svg(reports));
    fs::path csv_path(opts.out);
    csv_path.replace_extension(".csv");
    write_text_file(csv_path.string(), combined_csv(reports));
    std::cerr << "wrote " << opts.out << " and " << csv_path.string() << "\n";
    return 0;
}

}  // namespace structdiv::cli
