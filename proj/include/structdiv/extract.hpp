#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "structdiv/catalog.hpp"
#include "structdiv/llm.hpp"
#include "structdiv/samples.hpp"

namespace structdiv {

struct JudgeConfig {
    // Wrapper prompt for llm-judge features; must reference {text} and
    // {feature_description}. A feature whose own spec contains {text} is
    // used directly as the full prompt instead.
    std::string prompt_template =
        "Feature: {feature_description}\n\nText:\n{text}\n\nDoes the text exhibit this feature? "
        "Answer yes or no.";
    std::vector<std::string> positive_markers{"yes"};
    std::vector<std::string> negative_markers{"no"};
    int default_bit = 0;  // assigned when a judge answer matches no marker
    LlmConfig llm;

    void validate() const;
};

// A judge answer that matched neither marker set; the default bit was used.
struct ExtractionIncident {
    std::uint32_t sample = 0;
    std::uint32_t feature = 0;
    std::string response;
};

struct ExtractionOutput {
    SampleSet set;
    std::vector<ExtractionIncident> incidents;
};

// Evaluates every catalog feature against every sample text: rule features
// locally and deterministically, llm-judge features with one chat call per
// (sample, feature) routed through the gateway (and therefore its cache).
// gateway may be null for rule-only catalogs.
ExtractionOutput extract_features(const SampleSet& set,
                                  std::shared_ptr<const FeatureCatalog> catalog,
                                  const JudgeConfig& judge, Gateway* gateway);

// Per-feature fraction of samples with the bit set. When `warn` is given,
// features present in more than half of the samples are reported there --
// the coverage rationale assumes rare features.
std::vector<double> feature_prevalence(const SampleSet& set, std::ostream* warn = nullptr);

}  // namespace structdiv
