#include "structdiv/samples.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "structdiv/errors.hpp"

namespace structdiv {

using nlohmann::json;

void FeatureVector::normalize() {
    std::sort(bits.begin(), bits.end());
    bits.erase(std::unique(bits.begin(), bits.end()), bits.end());
}

std::uint32_t SampleSet::effective_d() const {
    if (catalog) return catalog->d();
    std::uint32_t max_idx = 0;
    bool any = false;
    for (const auto& s : samples)
        if (s.features)
            for (std::uint32_t b : s.features->bits) {
                max_idx = std::max(max_idx, b);
                any = true;
            }
    return any ? max_idx + 1 : 0;
}

bool SampleSet::all_features_present() const {
    return std::all_of(samples.begin(), samples.end(),
                       [](const SampleRecord& s) { return s.features.has_value(); });
}

bool SampleSet::all_embeddings_present() const {
    return !samples.empty() && std::all_of(samples.begin(), samples.end(), [](const SampleRecord& s) {
               return s.embedding.has_value() && !s.embedding->empty();
           });
}

void SampleSet::validate() const {
    std::size_t dim = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.features && catalog) {
            for (std::uint32_t b : s.features->bits)
                if (b >= catalog->d())
                    throw ValidationError("sample " + std::to_string(i) + " (id \"" + s.id +
                                          "\"): feature index " + std::to_string(b) +
                                          " out of range (d=" + std::to_string(catalog->d()) + ")");
        }
        if (s.embedding) {
            if (s.embedding->empty())
                throw ValidationError("sample " + std::to_string(i) + ": empty embedding");
            if (dim == 0)
                dim = s.embedding->size();
            else if (s.embedding->size() != dim)
                throw ValidationError("sample " + std::to_string(i) + ": embedding dimension " +
                                      std::to_string(s.embedding->size()) + " != " +
                                      std::to_string(dim));
            for (float v : *s.embedding)
                if (!std::isfinite(v))
                    throw ValidationError("sample " + std::to_string(i) +
                                          ": non-finite embedding value");
        }
    }
}

SampleSet SampleSet::subset(const std::vector<std::uint32_t>& indices) const {
    SampleSet out;
    out.catalog = catalog;
    out.samples.reserve(indices.size());
    for (std::uint32_t i : indices) out.samples.push_back(samples.at(i));
    return out;
}

SampleSet load_samples(const std::string& path, std::shared_ptr<const FeatureCatalog> catalog) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open samples file: " + path);

    SampleSet set;
    set.catalog = std::move(catalog);

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        SampleRecord s;
        try {
            s.id = rec.value("id", "");
            s.text = rec.value("text", "");
            if (rec.contains("features")) {
                FeatureVector fv;
                for (const auto& j : rec["features"]) fv.bits.push_back(j.get<std::uint32_t>());
                fv.normalize();
                if (set.catalog) {
                    for (std::uint32_t b : fv.bits)
                        if (b >= set.catalog->d())
                            throw ParseError(path + ":" + std::to_string(line_no) +
                                             ": feature index " + std::to_string(b) +
                                             " out of range (d=" +
                                             std::to_string(set.catalog->d()) + ")");
                }
                s.features = std::move(fv);
            }
            if (rec.contains("embedding")) {
                std::vector<float> emb;
                for (const auto& j : rec["embedding"]) emb.push_back(j.get<float>());
                s.embedding = std::move(emb);
            }
            if (rec.contains("provenance")) {
                for (auto it = rec["provenance"].begin(); it != rec["provenance"].end(); ++it)
                    s.provenance[it.key()] = it.value().get<std::string>();
            }
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        set.samples.push_back(std::move(s));
    }
    set.validate();
    return set;
}

void save_samples(const SampleSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write samples file: " + path);
    for (const auto& s : set.samples) {
        json rec;
        rec["id"] = s.id;
        rec["text"] = s.text;
        if (s.features) rec["features"] = s.features->bits;
        if (s.embedding) rec["embedding"] = *s.embedding;
        if (!s.provenance.empty()) {
            json prov = json::object();
            for (const auto& [k, v] : s.provenance) prov[k] = v;
            rec["provenance"] = prov;
        }
        out << rec.dump() << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

void save_embeddings_sidecar(const SampleSet& set, const std::string& path) {
    if (!set.all_embeddings_present())
        throw ValidationError("cannot write sidecar: not all samples carry embeddings");
    const std::uint32_t k = set.k();
    const std::uint32_t dim = static_cast<std::uint32_t>(set.samples.front().embedding->size());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write embedding sidecar: " + path);
    auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    put_u32(k);
    put_u32(dim);
    static_assert(sizeof(float) == 4);
    for (const auto& s : set.samples)
        out.write(reinterpret_cast<const char*>(s.embedding->data()),
                  static_cast<std::streamsize>(dim * sizeof(float)));
    if (!out) throw IoError("write failed: " + path);
}

void load_embeddings_sidecar(SampleSet& set, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open embedding sidecar: " + path);
    auto get_u32 = [&]() {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        if (!in) throw ParseError("embedding sidecar truncated: " + path);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    };
    const std::uint32_t k = get_u32();
    const std::uint32_t dim = get_u32();
    if (k != set.k())
        throw DimensionMismatchError("embedding sidecar has " + std::to_string(k) +
                                     " rows but sample set has " + std::to_string(set.k()));
    if (dim == 0) throw ParseError("embedding sidecar has zero dimension: " + path);
    for (auto& s : set.samples) {
        std::vector<float> row(dim);
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(dim * sizeof(float)));
        if (!in) throw ParseError("embedding sidecar truncated: " + path);
        s.embedding = std::move(row);
    }
    set.validate();
}

}  // namespace structdiv
