#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace structdiv {

enum class ExtractorKind { Rule, LlmJudge };

// One user-defined binary feature. For `Rule` the spec string is a predicate
// in the rule DSL (see rules.hpp); for `LlmJudge` it is the question put to
// the judge model (falling back to `description` when empty).
struct FeatureDef {
    std::string id;
    std::string description;
    ExtractorKind kind = ExtractorKind::Rule;
    std::string spec;
};

// Ordered feature space; index i refers to the same feature for the lifetime
// of the catalog, matching the order in the source file.
struct FeatureCatalog {
    std::string name;
    std::vector<FeatureDef> features;

    std::uint32_t d() const { return static_cast<std::uint32_t>(features.size()); }

    // Throws ValidationError on duplicate ids, empty feature list, or rule
    // specs that do not parse.
    void validate() const;
};

// Reads a catalog document ({name, features:[{id, description, extractor}]})
// and validates it. Feature order is file order.
FeatureCatalog load_catalog(const std::string& path);

void save_catalog(const FeatureCatalog& catalog, const std::string& path);

}  // namespace structdiv
