#include "structdiv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "structdiv/errors.hpp"
#include "structdiv/parallel.hpp"

namespace structdiv {

void MetricConfig::validate() const {
    if (n < 1) throw ValidationError("metric config: n must be >= 1");
    if (max_pairs == 0) throw ValidationError("metric config: max_pairs must be positive");
}

const char* to_string(PairDomain p) { return p == PairDomain::Observed ? "observed" : "strict"; }
const char* to_string(LogBase b) { return b == LogBase::Base2 ? "base2" : "natural"; }

PairDomain pair_domain_from_string(const std::string& s) {
    if (s == "observed") return PairDomain::Observed;
    if (s == "strict") return PairDomain::Strict;
    throw ValidationError("unknown pair domain \"" + s + "\" (expected observed|strict)");
}

LogBase log_base_from_string(const std::string& s) {
    if (s == "base2") return LogBase::Base2;
    if (s == "natural") return LogBase::Natural;
    throw ValidationError("unknown log base \"" + s + "\" (expected base2|natural)");
}

nlohmann::json MetricResult::to_json() const {
    nlohmann::json j{{"metric_id", metric_id},       {"value", value},
                     {"n", n},                       {"k", k},
                     {"pair_domain", to_string(pair_domain)},
                     {"log_base", to_string(log_base)},
                     {"pair_domain_size", pair_domain_size}};
    if (debug_similarity) j["debug"] = {{"overlap_similarity", *debug_similarity}};
    return j;
}

namespace {

constexpr std::uint64_t kRowBlock = 1u << 14;   // rows per block in row sums
constexpr std::uint64_t kGroupBlock = 8;        // outer rows per block in pair pass

void require_nonempty(const ComboCounts& counts) {
    if (counts.k() == 0) throw EmptySetError("metric requested on empty sample set (k=0)");
}

MetricResult base_result(const char* id, const ComboCounts& counts, const MetricConfig& cfg) {
    MetricResult r;
    r.metric_id = id;
    r.n = counts.n();
    r.k = counts.k();
    r.pair_domain = cfg.pair_domain;
    r.log_base = cfg.log_base;
    return r;
}

// Observed combos grouped by identical supporting-sample list. Pair terms of
// the four pairwise metrics depend only on the two support lists, so one
// evaluation per group pair, weighted by multiplicity, is exact.
struct SupportGroups {
    std::vector<std::span<const std::uint32_t>> lists;  // sorted ascending sample ids
    std::vector<std::uint64_t> mult;
    std::uint64_t zero_mult = 0;  // strict mode: C(d,n) - observed
    std::uint64_t domain_size = 0;  // M

    std::size_t size() const { return mult.size(); }
};

SupportGroups build_groups(const ComboCounts& counts, const MetricConfig& cfg) {
    const std::size_t rows = counts.observed_count();
    std::vector<std::uint32_t> order(rows);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const auto la = counts.samples_at(a), lb = counts.samples_at(b);
        if (std::lexicographical_compare(la.begin(), la.end(), lb.begin(), lb.end())) return true;
        if (std::lexicographical_compare(lb.begin(), lb.end(), la.begin(), la.end())) return false;
        return a < b;
    });

    SupportGroups g;
    std::size_t i = 0;
    while (i < rows) {
        const auto list = counts.samples_at(order[i]);
        std::size_t j = i + 1;
        while (j < rows) {
            const auto other = counts.samples_at(order[j]);
            if (!std::equal(list.begin(), list.end(), other.begin(), other.end())) break;
            ++j;
        }
        g.lists.push_back(list);
        g.mult.push_back(j - i);
        i = j;
    }

    g.domain_size = rows;
    if (cfg.pair_domain == PairDomain::Strict) {
        if (!counts.total_combos_exact())
            throw ValidationError(
                "strict pair domain: C(d,n) does not fit in 64 bits; use observed mode");
        g.zero_mult = counts.total_combos() - rows;
        g.domain_size = counts.total_combos();
    }
    return g;
}

std::uint64_t intersection_size(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    std::uint64_t n = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j])
            ++i;
        else if (a[i] > b[j])
            ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

struct PairwiseStats {
    double bj_sum = 0.0;    // boosted Jaccard, weight included
    double dice_sum = 0.0;  // sum of Dice distances
    double owi_sum = 0.0;   // sum of one-way inclusion distances
    double wo_sum = 0.0;    // sum of overlap similarities
    std::uint64_t domain_size = 0;

    void merge(const PairwiseStats& o) {
        bj_sum += o.bj_sum;
        dice_sum += o.dice_sum;
        owi_sum += o.owi_sum;
        wo_sum += o.wo_sum;
    }
};

// One pass shared by all four pairwise metrics. Summation order is fixed by
// (group order, block size), so results do not depend on thread count.
PairwiseStats compute_pairwise_stats(const ComboCounts& counts, const MetricConfig& cfg) {
    const SupportGroups g = build_groups(counts, cfg);
    const std::uint64_t G = g.size();

    std::uint64_t evals = G;  // within-group terms
    evals += G * (G > 0 ? (G - 1) : 0) / 2;
    if (g.zero_mult > 0) evals += G + 1;
    if (evals > cfg.max_pairs)
        throw PairBudgetError("pairwise metrics need " + std::to_string(evals) +
                                  " pair evaluations, exceeding max_pairs=" +
                                  std::to_string(cfg.max_pairs),
                              evals);

    const double k = counts.k();
    const double jaccard_weight =
        static_cast<double>(counts.n()) * static_cast<double>(counts.n()) / (k * k);

    PairwiseStats total = blocked_reduce<PairwiseStats>(
        G, kGroupBlock,
        [&](PairwiseStats& acc, std::uint64_t begin, std::uint64_t end) {
            for (std::uint64_t a = begin; a < end; ++a) {
                const auto la = g.lists[a];
                const double sa = static_cast<double>(la.size());
                const double ma = static_cast<double>(g.mult[a]);
                for (std::uint64_t b = a + 1; b < G; ++b) {
                    const auto lb = g.lists[b];
                    const double sb = static_cast<double>(lb.size());
                    const double both = static_cast<double>(intersection_size(la, lb));
                    const double weight = ma * static_cast<double>(g.mult[b]);
                    const double either = sa + sb - both;
                    acc.bj_sum += weight * jaccard_weight * (1.0 - both / either);
                    acc.dice_sum += weight * (1.0 - 2.0 * both / (sa + sb));
                    const double mn = std::min(sa, sb);
                    acc.owi_sum += weight * (1.0 - both / mn);
                    acc.wo_sum += weight * (both / mn);
                }
            }
        },
        [](PairwiseStats& t, const PairwiseStats& p) { t.merge(p); });

    // Within-group pairs have identical support sets: every distance term is
    // 0 and the overlap similarity is 1.
    for (std::uint64_t a = 0; a < G; ++a) {
        const double m = static_cast<double>(g.mult[a]);
        total.wo_sum += m * (m - 1.0) / 2.0;
    }

    // Strict mode: pairs that involve zero-support combos. Empty-vs-observed
    // pairs have both = 0, so the Jaccard and Dice distances are 1 while the
    // min-based terms are defined as 0; empty-vs-empty pairs contribute 0
    // everywhere.
    if (g.zero_mult > 0) {
        const double z = static_cast<double>(g.zero_mult);
        for (std::uint64_t a = 0; a < G; ++a) {
            const double m = static_cast<double>(g.mult[a]);
            total.bj_sum += z * m * jaccard_weight;
            total.dice_sum += z * m;
        }
    }

    total.domain_size = g.domain_size;
    return total;
}

double pair_count(std::uint64_t m) {
    const double md = static_cast<double>(m);
    return md * (md - 1.0) / 2.0;
}

void require_pair_domain(const PairwiseStats& s, const char* id) {
    if (s.domain_size < 2)
        throw PairDomainError(std::string(id) + ": pair domain has " +
                              std::to_string(s.domain_size) + " combos, need at least 2");
}

}  // namespace

MetricResult coverage(const ComboCounts& counts, const MetricConfig& cfg) {
    require_nonempty(counts);
    MetricResult r = base_result("coverage", counts, cfg);
    const double denom = std::log(static_cast<double>(counts.k()) + 1.0);
    const double num = blocked_sum(counts.observed_count(), kRowBlock, [&](std::uint64_t row) {
        return std::log(static_cast<double>(counts.support_at(row)) + 1.0);
    });
    r.value = num / denom;
    return r;
}

MetricResult weighted_surprisal(const ComboCounts& counts, const MetricConfig& cfg) {
    require_nonempty(counts);
    MetricResult r = base_result("weighted_surprisal", counts, cfg);
    const double k = counts.k();
    const bool bits = cfg.log_base == LogBase::Base2;
    r.value = blocked_sum(counts.observed_count(), kRowBlock, [&](std::uint64_t row) {
        const double p = static_cast<double>(counts.support_at(row)) / k;
        return -p * (bits ? std::log2(p) : std::log(p));
    });
    return r;
}

MetricResult boosted_jaccard(const ComboCounts& counts, const MetricConfig& cfg) {
    require_nonempty(counts);
    MetricResult r = base_result("boosted_jaccard", counts, cfg);
    const PairwiseStats s = compute_pairwise_stats(counts, cfg);
    r.pair_domain_size = s.domain_size;
    r.value = s.bj_sum;
    return r;
}

MetricResult dice_diversity(const ComboCounts& counts, const MetricConfig& cfg) {
    require_nonempty(counts);
    MetricResult r = base_result("dice", counts, cfg);
    const PairwiseStats s = compute_pairwise_stats(counts, cfg);
    require_pair_domain(s, "dice");
    r.pair_domain_size = s.domain_size;
    r.value = s.dice_sum / pair_count(s.domain_size);
    return r;
}

MetricResult one_way_inclusion(const ComboCounts& counts, const MetricConfig& cfg) {
    require_nonempty(counts);
    MetricResult r = base_result("one_way_inclusion", counts, cfg);
    const PairwiseStats s = compute_pairwise_stats(counts, cfg);
    require_pair_domain(s, "one_way_inclusion");
    r.pair_domain_size = s.domain_size;
    r.value = s.owi_sum / pair_count(s.domain_size);
    return r;
}

MetricResult weighted_overlap(const ComboCounts& counts, const MetricConfig& cfg) {
    require_nonempty(counts);
    MetricResult r = base_result("weighted_overlap", counts, cfg);
    const PairwiseStats s = compute_pairwise_stats(counts, cfg);
    require_pair_domain(s, "weighted_overlap");
    r.pair_domain_size = s.domain_size;
    const double similarity = s.wo_sum / pair_count(s.domain_size);
    r.debug_similarity = similarity;
    r.value = 1.0 - similarity;
    return r;
}

std::vector<MetricResult> all_structural_metrics(const SampleSet& set, const MetricConfig& cfg,
                                                 const EnumerationBudget& budget) {
    cfg.validate();
    const ComboCounts counts = count_supports(set, cfg.n, budget);
    return {coverage(counts, cfg),        weighted_surprisal(counts, cfg),
            boosted_jaccard(counts, cfg), dice_diversity(counts, cfg),
            one_way_inclusion(counts, cfg), weighted_overlap(counts, cfg)};
}

}  // namespace structdiv
