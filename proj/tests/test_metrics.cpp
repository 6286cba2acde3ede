#include <doctest.h>

#include <cmath>

#include "naive.hpp"
#include "structdiv/errors.hpp"
#include "structdiv/metrics.hpp"
#include "structdiv/rng.hpp"
#include "test_helpers.hpp"

using namespace structdiv;

namespace {

MetricConfig strict_cfg(std::uint32_t n) {
    MetricConfig cfg;
    cfg.n = n;
    cfg.pair_domain = PairDomain::Strict;
    return cfg;
}

struct SixValues {
    double coverage, surprisal, bj, dice, owi, wo;
};

SixValues compute_six(const std::vector<std::vector<std::uint32_t>>& sets, std::uint32_t d,
                      const MetricConfig& cfg) {
    const auto counts = count_supports(testutil::make_set(sets, d), cfg.n, EnumerationBudget{});
    return {coverage(counts, cfg).value,        weighted_surprisal(counts, cfg).value,
            boosted_jaccard(counts, cfg).value, dice_diversity(counts, cfg).value,
            one_way_inclusion(counts, cfg).value, weighted_overlap(counts, cfg).value};
}

}  // namespace

TEST_CASE("coverage identities") {
    SUBCASE("single sample with exactly n active features scores exactly 1.0") {
        for (std::uint32_t n : {1u, 2u, 3u, 5u}) {
            std::vector<std::uint32_t> active(n);
            std::iota(active.begin(), active.end(), 0u);
            const auto counts =
                count_supports(testutil::make_set({active}, n + 2), n, EnumerationBudget{});
            CHECK(coverage(counts, strict_cfg(n)).value == 1.0);
        }
    }
    SUBCASE("all-zero feature vectors score 0.0") {
        const auto counts = count_supports(testutil::make_set({{}, {}, {}}, 5), 2,
                                           EnumerationBudget{});
        CHECK(coverage(counts, strict_cfg(2)).value == 0.0);
    }
    SUBCASE("hand value: S={{0,1},{2}}, d=3, n=2") {
        const auto counts =
            count_supports(testutil::make_set({{0, 1}, {2}}, 3), 2, EnumerationBudget{});
        CHECK(testutil::close(coverage(counts, strict_cfg(2)).value,
                              std::log(2.0) / std::log(3.0)));
    }
    SUBCASE("empty set errors") {
        const auto counts = count_supports(testutil::make_set({}, 3), 2, EnumerationBudget{});
        CHECK_THROWS_AS(coverage(counts, strict_cfg(2)), EmptySetError);
    }
}

TEST_CASE("coverage is base independent") {
    SplitMix64 rng(31);
    const auto sets = testutil::random_active_sets(10, 7, 0.4, rng);
    const auto counts = count_supports(testutil::make_set(sets, 7), 2, EnumerationBudget{});
    MetricConfig bits = strict_cfg(2);
    MetricConfig nats = strict_cfg(2);
    nats.log_base = LogBase::Natural;
    CHECK(coverage(counts, bits).value == coverage(counts, nats).value);
}

TEST_CASE("weighted surprisal") {
    SUBCASE("all combos at support k give 0") {
        const auto counts = count_supports(testutil::make_set({{0, 1, 2}, {0, 1, 2}}, 3), 2,
                                           EnumerationBudget{});
        CHECK(weighted_surprisal(counts, strict_cfg(2)).value == 0.0);
    }
    SUBCASE("hand value: single combo at support 1 of k=2 is half a bit") {
        const auto counts =
            count_supports(testutil::make_set({{0, 1}, {2}}, 3), 2, EnumerationBudget{});
        CHECK(testutil::close(weighted_surprisal(counts, strict_cfg(2)).value, 0.5, 1e-12));
    }
    SUBCASE("natural-log units") {
        const auto counts =
            count_supports(testutil::make_set({{0, 1}, {2}}, 3), 2, EnumerationBudget{});
        MetricConfig cfg = strict_cfg(2);
        cfg.log_base = LogBase::Natural;
        CHECK(testutil::close(weighted_surprisal(counts, cfg).value, 0.5 * std::log(2.0), 1e-12));
    }
}

TEST_CASE("boosted jaccard hand cases") {
    MetricConfig cfg = strict_cfg(2);
    SUBCASE("two combos with identical support sets contribute 0") {
        // both combos supported by exactly sample 0
        const auto counts =
            count_supports(testutil::make_set({{0, 1, 2}}, 3), 2, EnumerationBudget{});
        // three combos, all identical support {0}: all distance terms 0
        CHECK(boosted_jaccard(counts, cfg).value == 0.0);
    }
    SUBCASE("disjoint singleton supports: pair term n^2/k^2 * 1") {
        const auto counts =
            count_supports(testutil::make_set({{0, 1}, {2, 3}}, 4), 2, EnumerationBudget{});
        MetricConfig obs = cfg;
        obs.pair_domain = PairDomain::Observed;
        CHECK(testutil::close(boosted_jaccard(counts, obs).value, 1.0, 1e-12));
    }
}

TEST_CASE("dice and inclusion and overlap hand cases") {
    SUBCASE("identical support sets: dice 0, owi 0, overlap diversity 0") {
        MetricConfig obs;
        obs.n = 2;
        const auto counts =
            count_supports(testutil::make_set({{0, 1, 2}}, 3), 2, EnumerationBudget{});
        CHECK(dice_diversity(counts, obs).value == 0.0);
        CHECK(one_way_inclusion(counts, obs).value == 0.0);
        CHECK(weighted_overlap(counts, obs).value == 0.0);
        CHECK(*weighted_overlap(counts, obs).debug_similarity == 1.0);
    }
    SUBCASE("disjoint support sets: dice 1, owi 1, overlap diversity 1") {
        MetricConfig obs;
        obs.n = 2;
        const auto counts =
            count_supports(testutil::make_set({{0, 1}, {2, 3}}, 4), 2, EnumerationBudget{});
        CHECK(dice_diversity(counts, obs).value == 1.0);
        CHECK(one_way_inclusion(counts, obs).value == 1.0);
        CHECK(weighted_overlap(counts, obs).value == 1.0);
    }
    SUBCASE("fewer than 2 combos in the observed domain errors") {
        MetricConfig obs;
        obs.n = 2;
        const auto counts =
            count_supports(testutil::make_set({{0, 1}, {0, 1}}, 4), 2, EnumerationBudget{});
        REQUIRE(counts.observed_count() == 1);
        CHECK_THROWS_AS(dice_diversity(counts, obs), PairDomainError);
        CHECK_THROWS_AS(one_way_inclusion(counts, obs), PairDomainError);
        CHECK_THROWS_AS(weighted_overlap(counts, obs), PairDomainError);
        CHECK(boosted_jaccard(counts, obs).value == 0.0);  // sum over empty pair set
    }
}

TEST_CASE("oracle equivalence: strict and observed modes match the naive reference") {
    SplitMix64 rng(99);
    int done = 0;
    for (int trial = 0; done < 220; ++trial) {
        (void)trial;
        const std::uint32_t d = 3 + static_cast<std::uint32_t>(rng.below(6));  // 3..8
        const std::uint32_t k = 1 + static_cast<std::uint32_t>(rng.below(12));
        const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.below(3));
        if (n > d) continue;
        const auto sets = testutil::random_active_sets(k, d, 0.3, rng);

        for (const bool observed : {false, true}) {
            const auto ref = reference::naive_structural_metrics(sets, d, n, observed, true);
            MetricConfig cfg = strict_cfg(n);
            if (observed) cfg.pair_domain = PairDomain::Observed;
            const auto counts =
                count_supports(testutil::make_set(sets, d), n, EnumerationBudget{});

            CHECK(testutil::close(coverage(counts, cfg).value, ref.coverage));
            CHECK(testutil::close(weighted_surprisal(counts, cfg).value, ref.weighted_surprisal));
            CHECK(testutil::close(boosted_jaccard(counts, cfg).value, ref.boosted_jaccard));
            if (ref.pair_domain_size >= 2) {
                CHECK(testutil::close(dice_diversity(counts, cfg).value, ref.dice));
                CHECK(testutil::close(one_way_inclusion(counts, cfg).value,
                                      ref.one_way_inclusion));
                CHECK(testutil::close(weighted_overlap(counts, cfg).value, ref.weighted_overlap));
            }
        }
        ++done;
    }
}

TEST_CASE("ranges and surprisal-zero characterization") {
    SplitMix64 rng(123);
    for (int trial = 0; trial < 60; ++trial) {
        const std::uint32_t d = 3 + static_cast<std::uint32_t>(rng.below(5));
        const std::uint32_t k = 1 + static_cast<std::uint32_t>(rng.below(10));
        const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.below(2));
        const auto sets = testutil::random_active_sets(k, d, 0.4, rng);
        const auto counts = count_supports(testutil::make_set(sets, d), n, EnumerationBudget{});
        MetricConfig cfg = strict_cfg(n);

        CHECK(coverage(counts, cfg).value >= 0.0);
        const double ws = weighted_surprisal(counts, cfg).value;
        CHECK(ws >= 0.0);
        bool all_extreme = true;
        for (const auto& [combo, sup] : counts.observed_combos())
            all_extreme = all_extreme && (sup == counts.k());
        CHECK((ws == 0.0) == all_extreme);

        if (counts.total_combos() >= 2) {
            for (const double v :
                 {dice_diversity(counts, cfg).value, one_way_inclusion(counts, cfg).value,
                  weighted_overlap(counts, cfg).value}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
}

TEST_CASE("metric invariance under sample reorder and feature permutation") {
    SplitMix64 rng(321);
    const std::uint32_t d = 7, k = 9, n = 2;
    auto sets = testutil::random_active_sets(k, d, 0.4, rng);
    MetricConfig cfg = strict_cfg(n);
    const auto base = compute_six(sets, d, cfg);

    auto shuffled = sets;
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    const auto reordered = compute_six(shuffled, d, cfg);

    std::vector<std::uint32_t> perm(d);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = d; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    auto permuted = sets;
    for (auto& s : permuted) {
        for (auto& f : s) f = perm[f];
        std::sort(s.begin(), s.end());
    }
    const auto relabeled = compute_six(permuted, d, cfg);

    for (const auto& other : {reordered, relabeled}) {
        CHECK(testutil::close(base.coverage, other.coverage, 1e-12));
        CHECK(testutil::close(base.surprisal, other.surprisal, 1e-12));
        CHECK(testutil::close(base.bj, other.bj, 1e-12));
        CHECK(testutil::close(base.dice, other.dice, 1e-12));
        CHECK(testutil::close(base.owi, other.owi, 1e-12));
        CHECK(testutil::close(base.wo, other.wo, 1e-12));
    }
}

TEST_CASE("coverage novel-combo dominance") {
    SplitMix64 rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.below(3));
        const std::uint32_t base_d = n + 2 + static_cast<std::uint32_t>(rng.below(4));
        const std::uint32_t k = 2 + static_cast<std::uint32_t>(rng.below(6));
        auto sets = testutil::random_active_sets(k, base_d, 0.5, rng);
        // pick an existing sample with at least n active features
        std::size_t pick = sets.size();
        for (std::size_t i = 0; i < sets.size(); ++i)
            if (sets[i].size() >= n) pick = i;
        if (pick == sets.size()) {
            --trial;
            continue;
        }
        const std::uint32_t a = static_cast<std::uint32_t>(sets[pick].size());

        // novel sample: a fresh features, none seen before
        std::vector<std::uint32_t> novel(a);
        std::iota(novel.begin(), novel.end(), base_d);
        const std::uint32_t d = base_d + a;

        auto with_dup = sets;
        with_dup.push_back(sets[pick]);
        auto with_novel = sets;
        with_novel.push_back(novel);

        MetricConfig cfg = strict_cfg(n);
        const auto dup_counts =
            count_supports(testutil::make_set(with_dup, d), n, EnumerationBudget{});
        const auto novel_counts =
            count_supports(testutil::make_set(with_novel, d), n, EnumerationBudget{});
        CHECK(coverage(novel_counts, cfg).value > coverage(dup_counts, cfg).value);
    }
}

TEST_CASE("all_structural_metrics matches individual calls bit-for-bit") {
    SplitMix64 rng(888);
    const auto sets = testutil::random_active_sets(10, 8, 0.35, rng);
    const auto set = testutil::make_set(sets, 8);
    MetricConfig cfg = strict_cfg(2);
    const auto all = all_structural_metrics(set, cfg, EnumerationBudget{});
    REQUIRE(all.size() == 6);
    CHECK(all[0].metric_id == "coverage");
    CHECK(all[1].metric_id == "weighted_surprisal");
    CHECK(all[2].metric_id == "boosted_jaccard");
    CHECK(all[3].metric_id == "dice");
    CHECK(all[4].metric_id == "one_way_inclusion");
    CHECK(all[5].metric_id == "weighted_overlap");

    const auto counts = count_supports(set, cfg.n, EnumerationBudget{});
    CHECK(all[0].value == coverage(counts, cfg).value);
    CHECK(all[1].value == weighted_surprisal(counts, cfg).value);
    CHECK(all[2].value == boosted_jaccard(counts, cfg).value);
    CHECK(all[3].value == dice_diversity(counts, cfg).value);
    CHECK(all[4].value == one_way_inclusion(counts, cfg).value);
    CHECK(all[5].value == weighted_overlap(counts, cfg).value);
}

TEST_CASE("pair budget") {
    SplitMix64 rng(555);
    // 6 samples with distinct singleton supports -> 6 groups
    const auto sets = testutil::random_active_sets(6, 12, 0.35, rng);
    const auto counts = count_supports(testutil::make_set(sets, 12), 1, EnumerationBudget{});
    MetricConfig cfg;
    cfg.n = 1;
    cfg.max_pairs = 2;
    CHECK_THROWS_AS(boosted_jaccard(counts, cfg), PairBudgetError);
}

TEST_CASE("metric result serializes with mode flags") {
    const auto counts =
        count_supports(testutil::make_set({{0, 1}, {1, 2}}, 3), 2, EnumerationBudget{});
    MetricConfig cfg;
    cfg.n = 2;
    const auto j = dice_diversity(counts, cfg).to_json();
    CHECK(j["metric_id"] == "dice");
    CHECK(j["pair_domain"] == "observed");
    CHECK(j["log_base"] == "base2");
    CHECK(j["k"] == 2);
    CHECK(j["n"] == 2);
    CHECK(j["pair_domain_size"] == 2);
}
