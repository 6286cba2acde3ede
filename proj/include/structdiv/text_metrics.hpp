#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "structdiv/samples.hpp"

namespace structdiv {

enum class TokenizerMode {
    WordLower,  // lowercased whitespace-delimited tokens
    Char        // byte-level tokens, for code-like domains
};

struct TokenizerConfig {
    TokenizerMode mode = TokenizerMode::WordLower;
    std::uint32_t n = 4;
};

const char* to_string(TokenizerMode);
TokenizerMode tokenizer_mode_from_string(const std::string&);

// Shannon entropy (bits) of the pooled n-gram distribution across all texts.
// Throws ValidationError when no text yields a single n-gram.
double ngram_entropy(const std::vector<std::string>& texts, const TokenizerConfig& cfg);

struct EmbeddingMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<float> data;  // row-major

    std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
    void push_row(std::span<const float> r);

    // Collects inline embeddings from a sample set; throws ValidationError
    // when any are missing or dimensions disagree.
    static EmbeddingMatrix from_set(const SampleSet& set);
};

// Mean cosine distance 1 - cos(u_i, u_j) over unordered row pairs. Rows are
// normalized once; summation order is fixed so the value is thread-count
// independent. Throws on fewer than 2 rows or a zero-norm row.
double embedding_diversity(const EmbeddingMatrix& emb);

}  // namespace structdiv
