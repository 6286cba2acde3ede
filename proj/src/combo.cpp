#include "structdiv/combo.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <ostream>

#include "structdiv/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace structdiv {

std::uint64_t binomial_saturated(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 res = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        res = res * (n - k + i) / i;  // exact at every step in this order
        if (res > UINT64_MAX) return UINT64_MAX;
    }
    return static_cast<std::uint64_t>(res);
}

namespace {

// Sort key holding a combo's indices in the high bits (so numeric order is
// lexicographic combo order) and the sample id in the low bits (so runs of
// one combo carry their supporters in ascending order).
template <int W>
struct Key {
    std::array<std::uint64_t, W> w{};

    bool operator<(const Key& o) const {
        for (int i = 0; i < W; ++i)
            if (w[i] != o.w[i]) return w[i] < o.w[i];
        return false;
    }

    void set(int pos, int width, std::uint64_t v) {
        const int word = pos / 64, off = pos % 64;
        const int shift = 64 - off - width;
        if (shift >= 0) {
            w[word] |= v << shift;
        } else {
            w[word] |= v >> -shift;
            w[word + 1] |= v << (64 + shift);
        }
    }

    std::uint64_t get(int pos, int width) const {
        const int word = pos / 64, off = pos % 64;
        const int shift = 64 - off - width;
        const std::uint64_t mask = width == 64 ? ~0ULL : (1ULL << width) - 1;
        if (shift >= 0) return (w[word] >> shift) & mask;
        return ((w[word] << -shift) | (w[word + 1] >> (64 + shift))) & mask;
    }

    // Equality of the leading `bits` bits (the combo part).
    bool same_prefix(const Key& o, int bits) const {
        int full = bits / 64;
        for (int i = 0; i < full; ++i)
            if (w[i] != o.w[i]) return false;
        const int rem = bits % 64;
        if (rem == 0) return true;
        const std::uint64_t mask = ~0ULL << (64 - rem);
        return (w[full] & mask) == (o.w[full] & mask);
    }
};

template <int W>
void enumerate_and_collect(const std::vector<std::span<const std::uint32_t>>& actives,
                           std::uint32_t n, int bpi, int bps,
                           const std::vector<std::uint64_t>& offsets, ComboCounts& out,
                           std::vector<std::uint32_t>& combo_indices,
                           std::vector<std::uint32_t>& supports,
                           std::vector<std::uint64_t>& list_offsets,
                           std::vector<std::uint32_t>& sample_lists) {
    const std::uint64_t total = offsets.back();
    std::vector<Key<W>> buf(total);

    const auto num_samples = static_cast<std::int64_t>(actives.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (std::int64_t i = 0; i < num_samples; ++i) {
        const auto& act = actives[static_cast<std::size_t>(i)];
        const auto a = static_cast<std::uint32_t>(act.size());
        if (a < n) continue;
        std::uint64_t pos = offsets[static_cast<std::size_t>(i)];
        std::vector<std::uint32_t> c(n);
        for (std::uint32_t j = 0; j < n; ++j) c[j] = j;
        for (;;) {
            Key<W> key{};
            for (std::uint32_t j = 0; j < n; ++j)
                key.set(static_cast<int>(j) * bpi, bpi, act[c[j]]);
            key.set(static_cast<int>(n) * bpi, bps, static_cast<std::uint64_t>(i));
            buf[pos++] = key;

            std::int64_t j = static_cast<std::int64_t>(n) - 1;
            while (j >= 0 && c[static_cast<std::size_t>(j)] == a - n + j) --j;
            if (j < 0) break;
            ++c[static_cast<std::size_t>(j)];
            for (std::uint32_t t = static_cast<std::uint32_t>(j) + 1; t < n; ++t)
                c[t] = c[t - 1] + 1;
        }
    }

    // Keys are unique (combo, sample) pairs, so any comparison sort produces
    // the same sequence regardless of algorithm or thread count.
    std::sort(buf.begin(), buf.end());

    const int combo_bits = static_cast<int>(n) * bpi;
    std::uint64_t i = 0;
    while (i < total) {
        std::uint64_t j = i + 1;
        while (j < total && buf[j].same_prefix(buf[i], combo_bits)) ++j;
        for (std::uint32_t f = 0; f < n; ++f)
            combo_indices.push_back(
                static_cast<std::uint32_t>(buf[i].get(static_cast<int>(f) * bpi, bpi)));
        supports.push_back(static_cast<std::uint32_t>(j - i));
        for (std::uint64_t t = i; t < j; ++t)
            sample_lists.push_back(static_cast<std::uint32_t>(buf[t].get(combo_bits, bps)));
        list_offsets.push_back(sample_lists.size());
        i = j;
    }
    (void)out;
}

}  // namespace

ComboCounts count_supports(const SampleSet& set, std::uint32_t n, const EnumerationBudget& budget) {
    const std::uint32_t k = set.k();
    const std::uint32_t d = set.effective_d();

    ComboCounts out;
    out.n_ = n;
    out.d_ = d;
    out.k_ = k;
    out.total_combos_ = binomial_saturated(d, n);
    out.total_combos_exact_ = out.total_combos_ != UINT64_MAX;
    out.list_offsets_.push_back(0);
    if (k == 0) return out;

    if (n < 1 || n > d)
        throw ValidationError("invalid n=" + std::to_string(n) + " for feature space d=" +
                              std::to_string(d));

    std::vector<std::span<const std::uint32_t>> actives;
    actives.reserve(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        const auto& s = set.samples[i];
        if (!s.features)
            throw ValidationError("sample " + std::to_string(i) + " (id \"" + s.id +
                                  "\") has no extracted features");
        actives.emplace_back(s.features->bits);
    }

    // Pre-flight: sum_i C(a_i, n), saturating, checked before any allocation.
    std::vector<std::uint64_t> offsets(k + 1, 0);
    std::uint64_t estimate = 0;
    for (std::uint32_t i = 0; i < k; ++i) {
        const std::uint64_t c = binomial_saturated(actives[i].size(), n);
        estimate = (estimate > UINT64_MAX - c) ? UINT64_MAX : estimate + c;
        offsets[i + 1] = estimate;
    }
    if (estimate > budget.max_generated_combos)
        throw BudgetExceededError(
            "enumeration would generate " + std::to_string(estimate) +
                " combos, exceeding the budget of " +
                std::to_string(budget.max_generated_combos),
            estimate);

    const int bpi = std::bit_width(std::max<std::uint32_t>(d - 1, 1u));
    const int bps = std::bit_width(std::max<std::uint32_t>(k - 1, 1u));
    const int total_bits = static_cast<int>(n) * bpi + bps;
    const int words = (total_bits + 63) / 64;

    switch (words) {
        case 1:
            enumerate_and_collect<1>(actives, n, bpi, bps, offsets, out, out.combo_indices_,
                                     out.supports_, out.list_offsets_, out.sample_lists_);
            break;
        case 2:
            enumerate_and_collect<2>(actives, n, bpi, bps, offsets, out, out.combo_indices_,
                                     out.supports_, out.list_offsets_, out.sample_lists_);
            break;
        case 3:
            enumerate_and_collect<3>(actives, n, bpi, bps, offsets, out, out.combo_indices_,
                                     out.supports_, out.list_offsets_, out.sample_lists_);
            break;
        case 4:
            enumerate_and_collect<4>(actives, n, bpi, bps, offsets, out, out.combo_indices_,
                                     out.supports_, out.list_offsets_, out.sample_lists_);
            break;
        default:
            throw ValidationError("combo key of " + std::to_string(total_bits) +
                                  " bits exceeds the supported 256-bit packing (n too large "
                                  "for this feature-space width)");
    }
    return out;
}

std::uint32_t ComboCounts::support(const Combo& c) const {
    if (c.indices.size() != n_)
        throw DimensionMismatchError("combo has " + std::to_string(c.indices.size()) +
                                     " indices, counts built for n=" + std::to_string(n_));
    for (std::size_t i = 0; i < c.indices.size(); ++i) {
        if (c.indices[i] >= d_)
            throw DimensionMismatchError("combo index " + std::to_string(c.indices[i]) +
                                         " out of range (d=" + std::to_string(d_) + ")");
        if (i > 0 && c.indices[i] <= c.indices[i - 1])
            throw DimensionMismatchError("combo indices must be strictly increasing");
    }

    std::size_t lo = 0, hi = supports_.size();
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        const auto row = combo_at(mid);
        if (std::lexicographical_compare(row.begin(), row.end(), c.indices.begin(),
                                         c.indices.end()))
            lo = mid + 1;
        else
            hi = mid;
    }
    if (lo < supports_.size()) {
        const auto row = combo_at(lo);
        if (std::equal(row.begin(), row.end(), c.indices.begin(), c.indices.end()))
            return supports_[lo];
    }
    return 0;
}

std::vector<std::pair<Combo, std::uint32_t>> ComboCounts::observed_combos() const {
    std::vector<std::pair<Combo, std::uint32_t>> out;
    out.reserve(observed_count());
    for (std::size_t r = 0; r < observed_count(); ++r) {
        const auto row = combo_at(r);
        out.push_back({Combo{{row.begin(), row.end()}}, supports_[r]});
    }
    return out;
}

std::uint64_t ComboCounts::sum_of_supports() const {
    std::uint64_t s = 0;
    for (std::uint32_t v : supports_) s += v;
    return s;
}

void ComboCounts::dump_csv(std::ostream& out) const {
    out << "combo_indices,support\n";
    for (std::size_t r = 0; r < observed_count(); ++r) {
        const auto row = combo_at(r);
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << '|';
            out << row[i];
        }
        out << ',' << supports_[r] << '\n';
    }
}

}  // namespace structdiv
