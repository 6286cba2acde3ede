#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "structdiv/catalog.hpp"

namespace structdiv {

// Sparse binary feature vector: the set of active feature indices, kept
// sorted and duplicate-free.
struct FeatureVector {
    std::vector<std::uint32_t> bits;

    void normalize();  // sort + dedup
    bool operator==(const FeatureVector&) const = default;
};

struct SampleRecord {
    std::string id;
    std::string text;
    std::optional<FeatureVector> features;
    std::optional<std::vector<float>> embedding;
    std::map<std::string, std::string> provenance;  // stage name -> stage output

    bool operator==(const SampleRecord&) const = default;
};

// A set of samples, optionally bound to the catalog that defines the feature
// indices. Immutable by convention once built; all accessors are const.
struct SampleSet {
    std::shared_ptr<const FeatureCatalog> catalog;  // may be null before extraction
    std::vector<SampleRecord> samples;

    std::uint32_t k() const { return static_cast<std::uint32_t>(samples.size()); }

    // d from the catalog when bound, else 1 + max feature index seen (0 if none).
    std::uint32_t effective_d() const;

    bool all_features_present() const;
    bool all_embeddings_present() const;

    // Throws ValidationError if any feature index is out of range for the
    // bound catalog or embeddings disagree in dimension.
    void validate() const;

    SampleSet subset(const std::vector<std::uint32_t>& indices) const;
};

// JSONL, one record per line:
//   {"id", "text", "features": [int]?, "embedding": [float]?, "provenance": {..}?}
// Errors name the offending line number.
SampleSet load_samples(const std::string& path, std::shared_ptr<const FeatureCatalog> catalog);

// Inverse of load_samples: load_samples(save_samples(S)) == S.
void save_samples(const SampleSet& set, const std::string& path);

// Sidecar embedding file: header (k: u32, dim: u32) little-endian, then
// k*dim float32 values row-major.
void save_embeddings_sidecar(const SampleSet& set, const std::string& path);
void load_embeddings_sidecar(SampleSet& set, const std::string& path);

}  // namespace structdiv
