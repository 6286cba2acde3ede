#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "naive.hpp"
#include "structdiv/combo.hpp"
#include "structdiv/errors.hpp"
#include "structdiv/rng.hpp"
#include "test_helpers.hpp"

using namespace structdiv;

namespace {

std::map<std::vector<std::uint32_t>, std::uint32_t> as_map(const ComboCounts& counts) {
    std::map<std::vector<std::uint32_t>, std::uint32_t> m;
    for (const auto& [combo, sup] : counts.observed_combos()) m[combo.indices] = sup;
    return m;
}

}  // namespace

TEST_CASE("binomial_saturated") {
    CHECK(binomial_saturated(8, 3) == 56);
    CHECK(binomial_saturated(300, 3) == 4455100);
    CHECK(binomial_saturated(3, 5) == 0);
    CHECK(binomial_saturated(10, 0) == 1);
    CHECK(binomial_saturated(300, 150) == UINT64_MAX);  // saturates
}

TEST_CASE("hand-enumerable instance") {
    const auto set = testutil::make_set({{0, 1}, {2}}, 3);
    const auto counts = count_supports(set, 2, EnumerationBudget{});
    CHECK(counts.observed_count() == 1);
    CHECK(counts.support({{0, 1}}) == 1);
    CHECK(counts.support({{0, 2}}) == 0);
    CHECK(counts.total_combos() == 3);
}

TEST_CASE("empty set gives empty counts for any n") {
    const auto set = testutil::make_set({}, 4);
    for (std::uint32_t n : {1u, 2u, 7u}) {
        const auto counts = count_supports(set, n, EnumerationBudget{});
        CHECK(counts.observed_count() == 0);
        CHECK(counts.k() == 0);
    }
}

TEST_CASE("invalid n") {
    const auto set = testutil::make_set({{0, 1}}, 3);
    CHECK_THROWS_AS(count_supports(set, 0, EnumerationBudget{}), ValidationError);
    CHECK_THROWS_AS(count_supports(set, 4, EnumerationBudget{}), ValidationError);
}

TEST_CASE("budget exceeded reports the pre-flight estimate") {
    const auto set = testutil::make_set({{0, 1, 2, 3, 4}, {0, 1, 2}}, 5);
    // sum C(5,2) + C(3,2) = 10 + 3 = 13
    try {
        count_supports(set, 2, EnumerationBudget{12});
        FAIL("expected BudgetExceededError");
    } catch (const BudgetExceededError& e) {
        CHECK(e.estimated_combos == 13);
    }
    CHECK_NOTHROW(count_supports(set, 2, EnumerationBudget{13}));
}

TEST_CASE("count_supports equals the naive oracle on random instances") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint32_t d = 2 + static_cast<std::uint32_t>(rng.below(9));   // up to 10
        const std::uint32_t k = static_cast<std::uint32_t>(rng.below(21));      // up to 20
        const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.below(3));
        if (n > d) continue;
        const auto sets = testutil::random_active_sets(k, d, 0.35, rng);
        const auto counts = count_supports(testutil::make_set(sets, d), n, EnumerationBudget{});
        const auto expected = reference::naive_count_supports(sets, d, n);
        CHECK(as_map(counts) == expected);
    }
}

TEST_CASE("50 random samples, d=8, n=3 match the brute-force oracle per-combo") {
    SplitMix64 rng(7);
    const auto sets = testutil::random_active_sets(50, 8, 0.4, rng);
    const auto counts = count_supports(testutil::make_set(sets, 8), 3, EnumerationBudget{});
    const auto expected = reference::naive_count_supports(sets, 8, 3);
    CHECK(as_map(counts) == expected);

    // support() answers point queries for all 56 combos, observed or not
    for (const auto& combo : reference::all_combos(8, 3)) {
        const auto it = expected.find(combo);
        CHECK(counts.support({combo}) == (it == expected.end() ? 0 : it->second));
    }
}

TEST_CASE("support validates the combo") {
    const auto set = testutil::make_set({{0, 1, 2}}, 4);
    const auto counts = count_supports(set, 2, EnumerationBudget{});
    CHECK_THROWS_AS(counts.support({{0, 1, 2}}), DimensionMismatchError);  // wrong size
    CHECK_THROWS_AS(counts.support({{1, 0}}), DimensionMismatchError);     // not increasing
    CHECK_THROWS_AS(counts.support({{0, 4}}), DimensionMismatchError);     // out of range
}

TEST_CASE("observed_combos is lexicographic and complete") {
    const auto set = testutil::make_set({{0, 2, 3}}, 4);
    const auto counts = count_supports(set, 2, EnumerationBudget{});
    const auto obs = counts.observed_combos();
    REQUIRE(obs.size() == 3);  // C(3,2)
    CHECK(obs[0].first.indices == std::vector<std::uint32_t>{0, 2});
    CHECK(obs[1].first.indices == std::vector<std::uint32_t>{0, 3});
    CHECK(obs[2].first.indices == std::vector<std::uint32_t>{2, 3});
    for (const auto& [combo, sup] : obs) CHECK(sup == 1);
}

TEST_CASE("conservation: sum of supports equals sum of per-sample C(a_i, n)") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::uint32_t d = 3 + static_cast<std::uint32_t>(rng.below(10));
        const std::uint32_t k = 1 + static_cast<std::uint32_t>(rng.below(15));
        const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.below(3));
        const auto sets = testutil::random_active_sets(k, d, 0.4, rng);
        const auto counts = count_supports(testutil::make_set(sets, d), n, EnumerationBudget{});
        std::uint64_t expected = 0;
        for (const auto& s : sets) expected += binomial_saturated(s.size(), n);
        CHECK(counts.sum_of_supports() == expected);
    }
}

TEST_CASE("permutation invariance") {
    SplitMix64 rng(5);
    const std::uint32_t d = 7, k = 12, n = 2;
    auto sets = testutil::random_active_sets(k, d, 0.4, rng);
    const auto base = as_map(count_supports(testutil::make_set(sets, d), n, EnumerationBudget{}));

    SUBCASE("sample order does not matter") {
        auto shuffled = sets;
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        CHECK(as_map(count_supports(testutil::make_set(shuffled, d), n, EnumerationBudget{})) ==
              base);
    }

    SUBCASE("feature permutation permutes combo keys, preserving counts") {
        std::vector<std::uint32_t> perm(d);
        std::iota(perm.begin(), perm.end(), 0u);
        for (std::size_t i = d; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);

        auto permuted = sets;
        for (auto& s : permuted) {
            for (auto& f : s) f = perm[f];
            std::sort(s.begin(), s.end());
        }
        const auto permuted_counts =
            as_map(count_supports(testutil::make_set(permuted, d), n, EnumerationBudget{}));

        std::map<std::vector<std::uint32_t>, std::uint32_t> expected;
        for (const auto& [combo, sup] : base) {
            auto mapped = combo;
            for (auto& f : mapped) f = perm[f];
            std::sort(mapped.begin(), mapped.end());
            expected[mapped] = sup;
        }
        CHECK(permuted_counts == expected);
    }
}

TEST_CASE("monotonicity: adding a sample never decreases support") {
    SplitMix64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const std::uint32_t d = 6;
        auto sets = testutil::random_active_sets(8, d, 0.4, rng);
        const auto before = as_map(count_supports(testutil::make_set(sets, d), 2, EnumerationBudget{}));
        sets.push_back(testutil::random_active_sets(1, d, 0.5, rng)[0]);
        const auto after = as_map(count_supports(testutil::make_set(sets, d), 2, EnumerationBudget{}));
        for (const auto& [combo, sup] : before) {
            const auto it = after.find(combo);
            REQUIRE(it != after.end());
            CHECK(it->second >= sup);
        }
    }
}

TEST_CASE("wide feature spaces use multi-word keys") {
    // d=5000 needs 13 bits per index; n=3 plus the sample id spills past 64 bits.
    std::vector<std::vector<std::uint32_t>> sets = {{10, 2500, 4999}, {10, 2500, 4998},
                                                    {10, 2500, 4999}};
    const auto counts = count_supports(testutil::make_set(sets, 5000), 3, EnumerationBudget{});
    CHECK(counts.support({{10, 2500, 4999}}) == 2);
    CHECK(counts.support({{10, 2500, 4998}}) == 1);
    CHECK(counts.sum_of_supports() == 3);
}

TEST_CASE("csv dump") {
    const auto set = testutil::make_set({{0, 1}, {0, 1}, {2}}, 3);
    const auto counts = count_supports(set, 2, EnumerationBudget{});
    std::ostringstream os;
    counts.dump_csv(os);
    CHECK(os.str() == "combo_indices,support\n0|1,2\n");
}
