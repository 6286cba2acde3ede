#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "structdiv/samples.hpp"
#include "structdiv/text_metrics.hpp"

namespace structdiv {

struct PdcConfig {
    std::uint32_t oversample = 300;
    std::uint32_t clusters_k = 100;
    std::uint32_t kmeans_max_iters = 100;
    double kmeans_tolerance = 1e-6;
    std::uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
};

struct KmeansResult {
    std::vector<std::uint32_t> assignments;
    std::vector<std::vector<double>> centroids;
    std::uint32_t iterations = 0;
    // Within-cluster sum of squares after each assignment pass; non-increasing
    // between consecutive entries except across reseed iterations.
    std::vector<double> wcss_trace;
    std::vector<std::uint32_t> reseed_iterations;
};

// Lloyd's algorithm with k-means++ seeding from cfg.seed. Runs until the
// assignment fixpoint, centroid shift < tolerance, or max_iters. Clusters
// that empty out are re-seeded from the point farthest from its centroid.
// Deterministic given the seed; the assignment pass parallelizes per point.
// Throws DegenerateInputError when the input has fewer distinct points than
// clusters.
KmeansResult kmeans(const EmbeddingMatrix& emb, std::uint32_t k_clusters, const PdcConfig& cfg);

// Post-decoding clustering selection: k-means the embeddings into clusters_k
// clusters and keep, per cluster, the sample nearest its centroid (ties to
// the lowest sample index). Requires set.k == emb.rows == cfg.oversample.
// Output is ordered by cluster index and has exactly clusters_k samples.
SampleSet pdc_select(const SampleSet& set, const EmbeddingMatrix& emb, const PdcConfig& cfg);

}  // namespace structdiv
