#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace structdiv {

// Deterministic parallel reduction: the index range is cut into fixed-size
// blocks, each block is accumulated serially by `block_fn(acc, begin, end)`,
// and block results are merged in block order. Block boundaries depend only
// on (count, block_size), so the floating-point summation order -- and hence
// the result, bit for bit -- is identical for any thread count.
template <typename Acc, typename BlockFn, typename MergeFn>
Acc blocked_reduce(std::uint64_t count, std::uint64_t block_size, BlockFn&& block_fn,
                   MergeFn&& merge_fn) {
    if (count == 0) return Acc{};
    if (block_size == 0) block_size = 1;
    const std::uint64_t num_blocks = (count + block_size - 1) / block_size;
    std::vector<Acc> partial(num_blocks);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(num_blocks); ++b) {
        const std::uint64_t begin = static_cast<std::uint64_t>(b) * block_size;
        const std::uint64_t end = std::min<std::uint64_t>(begin + block_size, count);
        block_fn(partial[static_cast<std::uint64_t>(b)], begin, end);
    }

    Acc total{};
    for (std::uint64_t b = 0; b < num_blocks; ++b) merge_fn(total, partial[b]);
    return total;
}

// Convenience wrapper for a plain double sum of term(i) over [0, count).
template <typename TermFn>
double blocked_sum(std::uint64_t count, std::uint64_t block_size, TermFn&& term) {
    return blocked_reduce<double>(
        count, block_size,
        [&](double& acc, std::uint64_t begin, std::uint64_t end) {
            double s = 0.0;
            for (std::uint64_t i = begin; i < end; ++i) s += term(i);
            acc = s;
        },
        [](double& total, const double& part) { total += part; });
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace structdiv
