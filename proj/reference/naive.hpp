#pragma once

// Naive serial reference implementations, kept deliberately independent of
// the optimized library: explicit loops over every C(d, n) combination and
// every combination pair, straight from the metric definitions. Linked only
// by tests and the benchmark; never by the library or CLI.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace structdiv::reference {

// All size-n subsets of [0, d) in lexicographic order.
std::vector<std::vector<std::uint32_t>> all_combos(std::uint32_t d, std::uint32_t n);

// Exact supports by testing every (combo, sample) pair; combos with support
// 0 are omitted. active_sets[i] must be sorted ascending.
std::map<std::vector<std::uint32_t>, std::uint32_t> naive_count_supports(
    const std::vector<std::vector<std::uint32_t>>& active_sets, std::uint32_t d, std::uint32_t n);

struct NaiveStructural {
    double coverage = 0.0;
    double weighted_surprisal = 0.0;
    double boosted_jaccard = 0.0;
    double dice = 0.0;
    double one_way_inclusion = 0.0;
    double weighted_overlap = 0.0;
    std::uint64_t pair_domain_size = 0;
};

// All six structural metrics over either the full combo domain (strict) or
// the supported combos only. surprisal_bits selects base-2 vs natural log.
NaiveStructural naive_structural_metrics(const std::vector<std::vector<std::uint32_t>>& active_sets,
                                         std::uint32_t d, std::uint32_t n, bool observed_only,
                                         bool surprisal_bits);

// Word-mode n-gram entropy recount (bits) on an independently written
// tokenizer and ordered-map accumulation.
double naive_ngram_entropy_words(const std::vector<std::string>& texts, std::uint32_t n);

double naive_embedding_diversity(const std::vector<std::vector<double>>& rows);

}  // namespace structdiv::reference
