#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "structdiv/errors.hpp"

namespace structdiv::cli {

// Flag misuse detected after parsing; mapped to exit code 2.
struct UsageError : Error {
    using Error::Error;
};

struct LlmFlags {
    std::string base_url;
    std::string model = "gpt-3.5-turbo";
    std::string api_key_env = "OPENAI_API_KEY";
    double temperature = 1.0;
    double top_p = 1.0;
    int max_tokens = 1024;
    double timeout = 60.0;
    int max_retries = 3;
    int rpm = 60;
    int parallelism = 4;
};

struct GenerateOpts {
    std::string strategy;
    std::string chain;
    std::string out;
    std::string stub;
    std::string cache;
    std::string manifest;        // defaults to <out>.manifest.json
    std::string from_manifest;   // re-execute a recorded run (stub mode)
    std::uint32_t k = 0;
    bool k_set = false;
    std::uint64_t seed = 0;
    std::uint32_t oversample = 300;
    std::uint32_t clusters = 100;
    std::uint32_t kmeans_max_iters = 100;
    double kmeans_tolerance = 1e-6;
    LlmFlags llm;
};

struct ExtractOpts {
    std::string samples;
    std::string catalog;
    std::string out;
    std::string judge_config;
    std::string stub;
    std::string cache;
    LlmFlags llm;
};

struct ScoreOpts {
    std::string samples;
    std::string catalog;
    std::string embeddings;
    bool embed_endpoint = false;
    std::string out_dir;
    std::string label;
    std::string stub;
    std::string cache;
    std::string dump_combos;
    std::uint32_t n = 3;
    std::string log_base = "base2";
    std::string pair_domain = "observed";
    std::uint64_t max_pairs = 20'000'000;
    std::uint64_t budget = 50'000'000;
    std::string tokenizer_mode = "word-lower";
    std::uint32_t ngram_n = 4;
    std::uint32_t bootstrap_iters = 300;
    std::uint32_t subsample = 50;
    std::uint64_t seed = 0;
    bool with_replacement = false;
    LlmFlags llm;
};

struct ReportOpts {
    std::vector<std::string> inputs;
    std::string out;
};

int run_generate(GenerateOpts opts);
int run_extract(const ExtractOpts& opts);
int run_score(const ScoreOpts& opts);
int run_report(const ReportOpts& opts);

}  // namespace structdiv::cli
