#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace cli = structdiv::cli;

namespace {

void add_llm_flags(CLI::App* cmd, cli::LlmFlags& f) {
    cmd->add_option("--base-url", f.base_url, "OpenAI-compatible endpoint base URL");
    cmd->add_option("--model", f.model, "model name (opaque passthrough)");
    cmd->add_option("--api-key-env", f.api_key_env,
                    "environment variable holding the API credential");
    cmd->add_option("--temperature", f.temperature, "sampling temperature");
    cmd->add_option("--top-p", f.top_p, "nucleus sampling mass, passed through to the server");
    cmd->add_option("--max-tokens", f.max_tokens, "completion token limit");
    cmd->add_option("--timeout", f.timeout, "request timeout in seconds");
    cmd->add_option("--max-retries", f.max_retries, "retries on 429/5xx/timeout");
    cmd->add_option("--rpm", f.rpm, "request rate limit per minute (<=0 disables)");
    cmd->add_option("--parallelism", f.parallelism, "concurrent in-flight requests");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"structdiv: structural diversity measurement and prompting pipelines"};
    app.require_subcommand(1);

    cli::GenerateOpts gen;
    auto* g = app.add_subcommand("generate", "run a sampling strategy against an LLM endpoint");
    g->add_option("--strategy", gen.strategy, "random|ss|cos|cos-pdc|random-pdc");
    g->add_option("--chain", gen.chain, "chain config file");
    g->add_option("--k", gen.k, "number of samples to produce")
        ->each([&](const std::string&) { gen.k_set = true; });
    g->add_option("--out", gen.out, "output samples JSONL");
    g->add_option("--seed", gen.seed, "seed for all randomness in this run");
    g->add_option("--stub", gen.stub, "stub response table (offline mode)");
    g->add_option("--cache", gen.cache, "response cache JSONL path");
    g->add_option("--manifest", gen.manifest, "manifest output path");
    g->add_option("--from-manifest", gen.from_manifest, "re-execute a recorded run");
    g->add_option("--oversample", gen.oversample, "pdc: initial sample count");
    g->add_option("--clusters", gen.clusters, "pdc: number of k-means clusters");
    g->add_option("--kmeans-max-iters", gen.kmeans_max_iters, "pdc: k-means iteration cap");
    g->add_option("--kmeans-tol", gen.kmeans_tolerance, "pdc: centroid shift tolerance");
    add_llm_flags(g, gen.llm);

    cli::ExtractOpts ext;
    auto* e = app.add_subcommand("extract", "evaluate catalog features over samples");
    e->add_option("--samples", ext.samples, "input samples JSONL");
    e->add_option("--catalog", ext.catalog, "feature catalog file");
    e->add_option("--out", ext.out, "output samples JSONL with features");
    e->add_option("--judge-llm", ext.judge_config, "judge config JSON file");
    e->add_option("--stub", ext.stub, "stub response table (offline judge)");
    e->add_option("--cache", ext.cache, "response cache JSONL path");
    add_llm_flags(e, ext.llm);

    cli::ScoreOpts sc;
    auto* s = app.add_subcommand("score", "compute diversity metrics and bootstrap statistics");
    s->add_option("--samples", sc.samples, "input samples JSONL");
    s->add_option("--catalog", sc.catalog, "catalog (fixes d; otherwise inferred)");
    s->add_option("--embeddings", sc.embeddings, "sidecar embedding file");
    s->add_flag("--embed-endpoint", sc.embed_endpoint,
                "fetch embeddings from the configured endpoint");
    s->add_option("--out", sc.out_dir, "output directory for report.json/report.csv");
    s->add_option("--label", sc.label, "strategy label used in merged reports");
    s->add_option("--n", sc.n, "combination size for structural metrics");
    s->add_option("--log-base", sc.log_base, "base2|natural")
        ->check(CLI::IsMember({"base2", "natural"}));
    s->add_option("--pair-domain", sc.pair_domain, "observed|strict")
        ->check(CLI::IsMember({"observed", "strict"}));
    s->add_option("--max-pairs", sc.max_pairs, "cap on evaluated pair terms");
    s->add_option("--budget", sc.budget, "cap on generated combos in support counting");
    s->add_option("--tokenizer-mode", sc.tokenizer_mode, "word-lower|char")
        ->check(CLI::IsMember({"word-lower", "char"}));
    s->add_option("--ngram-n", sc.ngram_n, "n-gram size for entropy");
    s->add_option("--bootstrap-iters", sc.bootstrap_iters, "bootstrap iterations (0 disables)");
    s->add_option("--subsample", sc.subsample, "bootstrap subsample size");
    s->add_option("--seed", sc.seed, "bootstrap seed");
    s->add_flag("--with-replacement", sc.with_replacement, "draw subsamples with replacement");
    s->add_option("--dump-combos", sc.dump_combos, "write observed combo supports as CSV");
    s->add_option("--stub", sc.stub, "stub response table (offline embeddings)");
    s->add_option("--cache", sc.cache, "response cache JSONL path");
    add_llm_flags(s, sc.llm);

    cli::ReportOpts rep;
    auto* r = app.add_subcommand("report", "merge score reports into a grouped bar chart");
    r->add_option("--inputs", rep.inputs, "score report JSON files");
    r->add_option("--out", rep.out, "output SVG path (a CSV is written alongside)");

    int exit_code = 0;
    g->callback([&] { exit_code = cli::run_generate(gen); });
    e->callback([&] { exit_code = cli::run_extract(ext); });
    s->callback([&] { exit_code = cli::run_score(sc); });
    r->callback([&] { exit_code = cli::run_report(rep); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    } catch (const cli::UsageError& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return 2;
    } catch (const structdiv::Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return exit_code;
}
