#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "structdiv/combo.hpp"
#include "structdiv/samples.hpp"

namespace structdiv {

enum class LogBase { Base2, Natural };
enum class PairDomain {
    Observed,  // combos with support >= 1 (tractable default)
    Strict     // all C(d, n) combos (oracle testing at small d)
};

struct MetricConfig {
    std::uint32_t n = 3;
    LogBase log_base = LogBase::Base2;
    PairDomain pair_domain = PairDomain::Observed;
    // Cap on evaluated pair terms. Combos sharing an identical supporting
    // sample list are grouped and evaluated once per group pair, so the cap
    // bounds the work actually performed, not the nominal combo-pair count.
    std::uint64_t max_pairs = 20'000'000;

    void validate() const;
};

struct MetricResult {
    std::string metric_id;
    double value = 0.0;
    std::uint32_t n = 0;
    std::uint32_t k = 0;
    PairDomain pair_domain = PairDomain::Observed;
    LogBase log_base = LogBase::Base2;
    std::uint64_t pair_domain_size = 0;        // M for the averaged pairwise metrics
    std::optional<double> debug_similarity;    // weighted_overlap: raw similarity O

    nlohmann::json to_json() const;
};

const char* to_string(PairDomain);
const char* to_string(LogBase);
PairDomain pair_domain_from_string(const std::string&);
LogBase log_base_from_string(const std::string&);

// Coverage: sum over combos of log(support + 1), normalized by log(k + 1).
// Zero-support combos contribute log(1) = 0, so the sum over observed combos
// is exact; the value is independent of the logarithm base.
MetricResult coverage(const ComboCounts& counts, const MetricConfig& cfg);

// Weighted surprisal: -sum over combos of (support/k) * log(support/k), with
// 0*log(0) := 0; reported in units of cfg.log_base.
MetricResult weighted_surprisal(const ComboCounts& counts, const MetricConfig& cfg);

// Sum over unordered combo pairs of (n*n/k^2) * Jaccard distance between the
// pairs' supporting-sample sets; pairs whose union of supporters is empty
// contribute 0.
MetricResult boosted_jaccard(const ComboCounts& counts, const MetricConfig& cfg);

// Mean over unordered combo pairs of the Dice distance between supporting
// sets; zero-support pairs (strict mode only) contribute 0.
MetricResult dice_diversity(const ComboCounts& counts, const MetricConfig& cfg);

// Mean over unordered combo pairs of 1 - both/min(sup_i, sup_j); pairs with
// min = 0 contribute 0.
MetricResult one_way_inclusion(const ComboCounts& counts, const MetricConfig& cfg);

// 1 - mean overlap coefficient over unordered combo pairs; the raw overlap
// similarity is kept in debug_similarity.
MetricResult weighted_overlap(const ComboCounts& counts, const MetricConfig& cfg);

// Counts once, then evaluates all six structural metrics; values are
// bit-identical to the individual calls.
std::vector<MetricResult> all_structural_metrics(const SampleSet& set, const MetricConfig& cfg,
                                                 const EnumerationBudget& budget);

}  // namespace structdiv
