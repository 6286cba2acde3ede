#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "structdiv/samples.hpp"

namespace structdiv {

// A size-n feature combination: strictly increasing indices, all < d.
struct Combo {
    std::vector<std::uint32_t> indices;

    bool operator==(const Combo&) const = default;
    bool operator<(const Combo& o) const { return indices < o.indices; }
};

// Cap on the total number of (combo, sample) incidences count_supports may
// generate; the pre-flight estimate sum_i C(a_i, n) is checked against it
// before anything is allocated. Peak memory is roughly 8-32 bytes per
// generated combo.
struct EnumerationBudget {
    std::uint64_t max_generated_combos = 50'000'000;
};

// C(n, k) saturating at UINT64_MAX instead of overflowing.
std::uint64_t binomial_saturated(std::uint64_t n, std::uint64_t k);

// Support counts of all size-n feature combinations observed in a sample
// set. Combos with support 0 are not stored. Rows are kept in lexicographic
// combo order; each row also records the sorted list of supporting sample
// indices, which the pairwise metrics consume.
class ComboCounts {
public:
    std::uint32_t n() const { return n_; }
    std::uint32_t d() const { return d_; }
    std::uint32_t k() const { return k_; }

    // C(d, n); saturated at UINT64_MAX when it does not fit (see exact()).
    std::uint64_t total_combos() const { return total_combos_; }
    bool total_combos_exact() const { return total_combos_exact_; }

    std::size_t observed_count() const { return supports_.size(); }

    // Support of an arbitrary combo: stored count if present, else 0.
    // Throws DimensionMismatchError when c is not a valid size-n combo for d.
    std::uint32_t support(const Combo& c) const;

    // All combos with support >= 1 in lexicographic order.
    std::vector<std::pair<Combo, std::uint32_t>> observed_combos() const;

    // Row-level access for metric kernels.
    std::span<const std::uint32_t> combo_at(std::size_t row) const {
        return {combo_indices_.data() + row * n_, n_};
    }
    std::uint32_t support_at(std::size_t row) const { return supports_[row]; }
    std::span<const std::uint32_t> samples_at(std::size_t row) const {
        return {sample_lists_.data() + list_offsets_[row],
                static_cast<std::size_t>(list_offsets_[row + 1] - list_offsets_[row])};
    }

    std::uint64_t sum_of_supports() const;

    // Debug dump, one row per observed combo: indices joined with '|', then
    // the support count.
    void dump_csv(std::ostream& out) const;

private:
    std::uint32_t n_ = 0, d_ = 0, k_ = 0;
    std::uint64_t total_combos_ = 0;
    bool total_combos_exact_ = true;
    std::vector<std::uint32_t> combo_indices_;  // observed_count * n, row-major
    std::vector<std::uint32_t> supports_;
    std::vector<std::uint64_t> list_offsets_;   // observed_count + 1
    std::vector<std::uint32_t> sample_lists_;   // concatenated ascending sample ids

    friend ComboCounts count_supports(const SampleSet&, std::uint32_t, const EnumerationBudget&);
};

// Exact support counting by per-sample enumeration of C(a_i, n) subsets into
// a sort-and-run-length pass. Parallel over samples; output is independent
// of thread count. Requires features on every sample.
ComboCounts count_supports(const SampleSet& set, std::uint32_t n, const EnumerationBudget& budget);

}  // namespace structdiv
