#include "structdiv/text_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include "structdiv/errors.hpp"
#include "structdiv/parallel.hpp"

namespace structdiv {

const char* to_string(TokenizerMode m) {
    return m == TokenizerMode::WordLower ? "word-lower" : "char";
}

TokenizerMode tokenizer_mode_from_string(const std::string& s) {
    if (s == "word-lower") return TokenizerMode::WordLower;
    if (s == "char") return TokenizerMode::Char;
    throw ValidationError("unknown tokenizer mode \"" + s + "\" (expected word-lower|char)");
}

namespace {

std::vector<std::string> word_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur += static_cast<char>(std::tolower(c));
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace

double ngram_entropy(const std::vector<std::string>& texts, const TokenizerConfig& cfg) {
    if (cfg.n < 1) throw ValidationError("tokenizer config: n must be >= 1");

    std::unordered_map<std::string, std::uint64_t> counts;
    std::uint64_t total = 0;
    for (const auto& text : texts) {
        if (cfg.mode == TokenizerMode::Char) {
            if (text.size() < cfg.n) continue;
            for (std::size_t i = 0; i + cfg.n <= text.size(); ++i) {
                ++counts[text.substr(i, cfg.n)];
                ++total;
            }
        } else {
            const auto toks = word_tokens(text);
            if (toks.size() < cfg.n) continue;
            for (std::size_t i = 0; i + cfg.n <= toks.size(); ++i) {
                std::string key = toks[i];
                for (std::uint32_t j = 1; j < cfg.n; ++j) {
                    key += '\x1f';
                    key += toks[i + j];
                }
                ++counts[key];
                ++total;
            }
        }
    }
    if (total == 0)
        throw ValidationError("no n-grams: every text is shorter than n=" +
                              std::to_string(cfg.n) + " tokens");

    // Sum in sorted-count order so the result does not depend on hash-map
    // iteration order.
    std::vector<std::uint64_t> values;
    values.reserve(counts.size());
    for (const auto& [key, c] : counts) values.push_back(c);
    std::sort(values.begin(), values.end());

    const double t = static_cast<double>(total);
    double h = 0.0;
    for (std::uint64_t c : values) {
        const double p = static_cast<double>(c) / t;
        h -= p * std::log2(p);
    }
    return h;
}

void EmbeddingMatrix::push_row(std::span<const float> r) {
    if (rows == 0) dim = r.size();
    if (r.size() != dim)
        throw DimensionMismatchError("embedding row has dimension " + std::to_string(r.size()) +
                                     ", expected " + std::to_string(dim));
    data.insert(data.end(), r.begin(), r.end());
    ++rows;
}

EmbeddingMatrix EmbeddingMatrix::from_set(const SampleSet& set) {
    EmbeddingMatrix m;
    for (std::size_t i = 0; i < set.samples.size(); ++i) {
        const auto& s = set.samples[i];
        if (!s.embedding || s.embedding->empty())
            throw ValidationError("sample " + std::to_string(i) + " (id \"" + s.id +
                                  "\") has no embedding");
        m.push_row(*s.embedding);
    }
    return m;
}

double embedding_diversity(const EmbeddingMatrix& emb) {
    if (emb.rows < 2)
        throw ValidationError("embedding diversity needs at least 2 rows, got " +
                              std::to_string(emb.rows));
    if (emb.dim == 0) throw ValidationError("embedding diversity: zero-dimension rows");

    std::vector<double> unit(emb.rows * emb.dim);
    for (std::size_t i = 0; i < emb.rows; ++i) {
        const auto r = emb.row(i);
        double norm2 = 0.0;
        for (float v : r) {
            if (!std::isfinite(v))
                throw ValidationError("embedding row " + std::to_string(i) +
                                      " has a non-finite value");
            norm2 += static_cast<double>(v) * v;
        }
        if (norm2 == 0.0)
            throw ValidationError("embedding row " + std::to_string(i) + " has zero norm");
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t jj = 0; jj < emb.dim; ++jj)
            unit[i * emb.dim + jj] = static_cast<double>(r[jj]) * inv;
    }

    const double sum = blocked_reduce<double>(
        emb.rows, 16,
        [&](double& acc, std::uint64_t begin, std::uint64_t end) {
            double s = 0.0;
            for (std::uint64_t i = begin; i < end; ++i) {
                const double* a = unit.data() + i * emb.dim;
                for (std::uint64_t j = i + 1; j < emb.rows; ++j) {
                    const double* b = unit.data() + j * emb.dim;
                    // coincident directions are at distance exactly 0; the
                    // rounded dot product of a unit row with itself is not
                    if (std::memcmp(a, b, emb.dim * sizeof(double)) == 0) continue;
                    double dot = 0.0;
                    for (std::size_t t = 0; t < emb.dim; ++t) dot += a[t] * b[t];
                    s += 1.0 - dot;
                }
            }
            acc = s;
        },
        [](double& t, const double& p) { t += p; });

    const double pairs = static_cast<double>(emb.rows) * (static_cast<double>(emb.rows) - 1.0) / 2.0;
    return sum / pairs;
}

}  // namespace structdiv
