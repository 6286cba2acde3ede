#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "structdiv/samples.hpp"

namespace structdiv {

struct BootstrapConfig {
    std::uint32_t iterations = 300;
    std::uint32_t subsample_size = 50;
    std::uint64_t seed = 0;
    bool with_replacement = false;

    void validate() const;
};

struct BootstrapResult {
    std::string metric_id;
    double mean = 0.0;
    double stderr_ = 0.0;  // sample stddev of per-iteration values / sqrt(iterations)
    std::uint32_t iterations = 0;
    std::uint32_t subsample_size = 0;
    std::uint64_t seed = 0;
    bool with_replacement = false;
    std::vector<double> per_iteration_values;

    nlohmann::json to_json() const;
};

using MetricFn = std::function<double(const SampleSet&)>;

// Evaluates `metric` on `iterations` random size-`subsample_size` subsets of
// the set (without replacement by default). Subset t is drawn from the
// splitmix64 substream (seed, t), so iterations can run in parallel without
// affecting the result, and identical configs reproduce identical output.
// Metric failures are reported with their iteration index.
BootstrapResult bootstrap(const SampleSet& set, const MetricFn& metric, const BootstrapConfig& cfg,
                          const std::string& metric_id);

}  // namespace structdiv
