#include "structdiv/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "structdiv/errors.hpp"
#include "structdiv/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace structdiv {

void PdcConfig::validate() const {
    if (oversample < 1 || clusters_k < 1 || kmeans_max_iters < 1)
        throw ValidationError("pdc config: all counts must be positive");
    if (kmeans_tolerance <= 0) throw ValidationError("pdc config: tolerance must be positive");
    if (clusters_k > oversample)
        throw ValidationError("pdc config: clusters_k (" + std::to_string(clusters_k) +
                              ") exceeds oversample (" + std::to_string(oversample) + ")");
}

nlohmann::json PdcConfig::to_json() const {
    return {{"oversample", oversample},
            {"clusters_k", clusters_k},
            {"kmeans_max_iters", kmeans_max_iters},
            {"kmeans_tolerance", kmeans_tolerance},
            {"seed", seed}};
}

namespace {

double dist2(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t t = 0; t < dim; ++t) {
        const double diff = a[t] - b[t];
        s += diff * diff;
    }
    return s;
}

std::size_t count_distinct_rows(const EmbeddingMatrix& emb) {
    std::vector<std::uint32_t> order(emb.rows);
    std::iota(order.begin(), order.end(), 0u);
    const auto less = [&](std::uint32_t a, std::uint32_t b) {
        const auto ra = emb.row(a), rb = emb.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    };
    std::sort(order.begin(), order.end(), less);
    std::size_t distinct = emb.rows == 0 ? 0 : 1;
    for (std::size_t i = 1; i < order.size(); ++i)
        if (less(order[i - 1], order[i])) ++distinct;
    return distinct;
}

}  // namespace

KmeansResult kmeans(const EmbeddingMatrix& emb, std::uint32_t k_clusters, const PdcConfig& cfg) {
    const std::size_t rows = emb.rows, dim = emb.dim;
    if (rows == 0 || dim == 0) throw ValidationError("kmeans: empty embedding matrix");
    if (k_clusters < 1 || k_clusters > rows)
        throw ValidationError("kmeans: k_clusters must be in [1, rows]");
    if (count_distinct_rows(emb) < k_clusters)
        throw DegenerateInputError("kmeans: fewer distinct points than clusters");

    std::vector<double> x(rows * dim);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t t = 0; t < dim; ++t) x[i * dim + t] = emb.row(i)[t];
    const auto point = [&](std::size_t i) { return x.data() + i * dim; };

    // k-means++ seeding
    SplitMix64 rng = SplitMix64::stream(cfg.seed, 0);
    std::vector<double> centroids(static_cast<std::size_t>(k_clusters) * dim);
    const auto centroid = [&](std::size_t c) { return centroids.data() + c * dim; };

    std::vector<double> d2(rows);
    {
        const std::size_t first = rng.below(rows);
        std::copy_n(point(first), dim, centroid(0));
        for (std::size_t i = 0; i < rows; ++i) d2[i] = dist2(point(i), centroid(0), dim);
        for (std::uint32_t c = 1; c < k_clusters; ++c) {
            double total = 0.0;
            for (std::size_t i = 0; i < rows; ++i) total += d2[i];
            const double u = rng.next_double() * total;
            double cum = 0.0;
            std::size_t pick = rows;
            for (std::size_t i = 0; i < rows; ++i) {
                cum += d2[i];
                if (u < cum && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
            if (pick == rows) {  // fp edge: fall back to the last positive-distance point
                for (std::size_t i = rows; i-- > 0;)
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
            }
            std::copy_n(point(pick), dim, centroid(c));
            for (std::size_t i = 0; i < rows; ++i)
                d2[i] = std::min(d2[i], dist2(point(i), centroid(c), dim));
        }
    }

    KmeansResult res;
    res.assignments.assign(rows, 0);
    std::vector<double> point_d2(rows);

    const auto assign_pass = [&](std::vector<std::uint32_t>& out) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(rows); ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t best_c = 0;
            for (std::uint32_t c = 0; c < k_clusters; ++c) {
                const double dd = dist2(point(static_cast<std::size_t>(i)), centroid(c), dim);
                if (dd < best) {
                    best = dd;
                    best_c = c;
                }
            }
            out[static_cast<std::size_t>(i)] = best_c;
            point_d2[static_cast<std::size_t>(i)] = best;
        }
        double wcss = 0.0;
        for (std::size_t i = 0; i < rows; ++i) wcss += point_d2[i];
        res.wcss_trace.push_back(wcss);
    };

    assign_pass(res.assignments);

    std::vector<std::uint32_t> next(rows);
    for (std::uint32_t it = 1; it <= cfg.kmeans_max_iters; ++it) {
        res.iterations = it;

        // centroid update: means of assigned points, accumulated in index
        // order so the result is thread-count independent
        std::vector<double> acc(static_cast<std::size_t>(k_clusters) * dim, 0.0);
        std::vector<std::uint64_t> counts(k_clusters, 0);
        for (std::size_t i = 0; i < rows; ++i) {
            const std::uint32_t c = res.assignments[i];
            ++counts[c];
            for (std::size_t t = 0; t < dim; ++t) acc[c * dim + t] += point(i)[t];
        }

        double shift2 = 0.0;
        bool reseeded = false;
        std::vector<bool> taken(rows, false);
        for (std::uint32_t c = 0; c < k_clusters; ++c) {
            if (counts[c] == 0) {
                // re-seed from the point currently farthest from its centroid
                std::size_t far = rows;
                double far_d = -1.0;
                for (std::size_t i = 0; i < rows; ++i)
                    if (!taken[i] && point_d2[i] > far_d) {
                        far_d = point_d2[i];
                        far = i;
                    }
                taken[far] = true;
                std::copy_n(point(far), dim, centroid(c));
                reseeded = true;
                res.reseed_iterations.push_back(it);
                continue;
            }
            double move2 = 0.0;
            for (std::size_t t = 0; t < dim; ++t) {
                const double nv = acc[c * dim + t] / static_cast<double>(counts[c]);
                const double diff = nv - centroid(c)[t];
                move2 += diff * diff;
                centroid(c)[t] = nv;
            }
            shift2 = std::max(shift2, move2);
        }

        assign_pass(next);
        const bool fixpoint = next == res.assignments;
        res.assignments = next;
        if (!reseeded && (fixpoint || std::sqrt(shift2) < cfg.kmeans_tolerance)) break;
    }

    res.centroids.resize(k_clusters);
    for (std::uint32_t c = 0; c < k_clusters; ++c)
        res.centroids[c].assign(centroid(c), centroid(c) + dim);
    return res;
}

SampleSet pdc_select(const SampleSet& set, const EmbeddingMatrix& emb, const PdcConfig& cfg) {
    cfg.validate();
    if (set.k() != emb.rows)
        throw DimensionMismatchError("pdc_select: sample count " + std::to_string(set.k()) +
                                     " != embedding rows " + std::to_string(emb.rows));
    if (set.k() != cfg.oversample)
        throw ValidationError("pdc_select: sample count " + std::to_string(set.k()) +
                              " != configured oversample " + std::to_string(cfg.oversample));

    const KmeansResult km = kmeans(emb, cfg.clusters_k, cfg);
    const std::size_t dim = emb.dim;

    SampleSet out;
    out.catalog = set.catalog;
    out.samples.reserve(cfg.clusters_k);
    for (std::uint32_t c = 0; c < cfg.clusters_k; ++c) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = emb.rows;
        for (std::size_t i = 0; i < emb.rows; ++i) {
            if (km.assignments[i] != c) continue;
            double dd = 0.0;
            for (std::size_t t = 0; t < dim; ++t) {
                const double diff = static_cast<double>(emb.row(i)[t]) - km.centroids[c][t];
                dd += diff * diff;
            }
            if (dd < best) {  // strict: ties keep the lowest index
                best = dd;
                best_i = i;
            }
        }
        if (best_i == emb.rows)
            throw DegenerateInputError("pdc_select: cluster " + std::to_string(c) +
                                       " ended up empty");
        out.samples.push_back(set.samples[best_i]);
    }
    return out;
}

}  // namespace structdiv
