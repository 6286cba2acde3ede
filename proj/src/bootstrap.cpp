#include "structdiv/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "structdiv/errors.hpp"
#include "structdiv/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace structdiv {

void BootstrapConfig::validate() const {
    if (iterations < 1) throw ValidationError("bootstrap: iterations must be >= 1");
    if (subsample_size < 1) throw ValidationError("bootstrap: subsample_size must be >= 1");
}

nlohmann::json BootstrapResult::to_json() const {
    return {{"metric_id", metric_id},
            {"mean", mean},
            {"stderr", stderr_},
            {"iterations", iterations},
            {"subsample_size", subsample_size},
            {"seed", seed},
            {"with_replacement", with_replacement},
            {"per_iteration_values", per_iteration_values}};
}

BootstrapResult bootstrap(const SampleSet& set, const MetricFn& metric, const BootstrapConfig& cfg,
                          const std::string& metric_id) {
    cfg.validate();
    const std::uint32_t k = set.k();
    if (cfg.subsample_size > k)
        throw ValidationError("bootstrap: subsample_size " + std::to_string(cfg.subsample_size) +
                              " exceeds sample count " + std::to_string(k));

    BootstrapResult res;
    res.metric_id = metric_id;
    res.iterations = cfg.iterations;
    res.subsample_size = cfg.subsample_size;
    res.seed = cfg.seed;
    res.with_replacement = cfg.with_replacement;
    res.per_iteration_values.assign(cfg.iterations, 0.0);

    // First failing iteration (lowest index) wins, so the reported error does
    // not depend on scheduling.
    std::int64_t failed_at = -1;
    std::string failure;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4)
#endif
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(cfg.iterations); ++t) {
        SplitMix64 rng = SplitMix64::stream(cfg.seed, static_cast<std::uint64_t>(t));
        std::vector<std::uint32_t> idx;
        if (cfg.with_replacement) {
            idx.resize(cfg.subsample_size);
            for (auto& v : idx) v = static_cast<std::uint32_t>(rng.below(k));
        } else {
            idx = sample_without_replacement(k, cfg.subsample_size, rng);
        }
        try {
            res.per_iteration_values[static_cast<std::size_t>(t)] = metric(set.subset(idx));
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical(structdiv_bootstrap_error)
#endif
            if (failed_at < 0 || t < failed_at) {
                failed_at = t;
                failure = e.what();
            }
        }
    }
    if (failed_at >= 0)
        throw Error("bootstrap iteration " + std::to_string(failed_at) + " (metric " + metric_id +
                    "): " + failure);

    const auto& vals = res.per_iteration_values;
    const bool all_equal = std::all_of(vals.begin(), vals.end(),
                                       [&](double v) { return v == vals.front(); });
    if (all_equal) {
        // A constant metric must yield stderr exactly 0 (and mean exactly the
        // constant), which naive accumulation does not guarantee in floating
        // point.
        res.mean = vals.front();
        res.stderr_ = 0.0;
        return res;
    }

    double sum = 0.0;
    for (double v : vals) sum += v;
    res.mean = sum / static_cast<double>(vals.size());
    double ss = 0.0;
    for (double v : vals) ss += (v - res.mean) * (v - res.mean);
    const double var = ss / (static_cast<double>(vals.size()) - 1.0);
    res.stderr_ = std::sqrt(var) / std::sqrt(static_cast<double>(vals.size()));
    return res;
}

}  // namespace structdiv
