#include "naive.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <sstream>

namespace structdiv::reference {

std::vector<std::vector<std::uint32_t>> all_combos(std::uint32_t d, std::uint32_t n) {
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> cur;
    // recursive lexicographic enumeration
    const std::function<void(std::uint32_t)> rec = [&](std::uint32_t start) {
        if (cur.size() == n) {
            out.push_back(cur);
            return;
        }
        for (std::uint32_t i = start; i < d; ++i) {
            cur.push_back(i);
            rec(i + 1);
            cur.pop_back();
        }
    };
    if (n <= d) rec(0);
    return out;
}

namespace {

bool sample_contains(const std::vector<std::uint32_t>& active,
                     const std::vector<std::uint32_t>& combo) {
    for (std::uint32_t f : combo)
        if (!std::binary_search(active.begin(), active.end(), f)) return false;
    return true;
}

std::vector<std::uint32_t> supporters(const std::vector<std::vector<std::uint32_t>>& sets,
                                      const std::vector<std::uint32_t>& combo) {
    std::vector<std::uint32_t> s;
    for (std::uint32_t i = 0; i < sets.size(); ++i)
        if (sample_contains(sets[i], combo)) s.push_back(i);
    return s;
}

}  // namespace

std::map<std::vector<std::uint32_t>, std::uint32_t> naive_count_supports(
    const std::vector<std::vector<std::uint32_t>>& active_sets, std::uint32_t d, std::uint32_t n) {
    std::map<std::vector<std::uint32_t>, std::uint32_t> out;
    for (const auto& combo : all_combos(d, n)) {
        const auto s = supporters(active_sets, combo);
        if (!s.empty()) out[combo] = static_cast<std::uint32_t>(s.size());
    }
    return out;
}

NaiveStructural naive_structural_metrics(const std::vector<std::vector<std::uint32_t>>& active_sets,
                                         std::uint32_t d, std::uint32_t n, bool observed_only,
                                         bool surprisal_bits) {
    const double k = static_cast<double>(active_sets.size());
    NaiveStructural r;

    std::vector<std::vector<std::uint32_t>> domain;  // supporter lists per domain combo
    for (const auto& combo : all_combos(d, n)) {
        auto s = supporters(active_sets, combo);
        const double sup = static_cast<double>(s.size());
        r.coverage += std::log(sup + 1.0);
        if (sup > 0) {
            const double p = sup / k;
            r.weighted_surprisal -= p * (surprisal_bits ? std::log2(p) : std::log(p));
        }
        if (!observed_only || !s.empty()) domain.push_back(std::move(s));
    }
    r.coverage /= std::log(k + 1.0);
    r.pair_domain_size = domain.size();

    double wo_similarity = 0.0;
    for (std::size_t i = 0; i < domain.size(); ++i) {
        for (std::size_t j = i + 1; j < domain.size(); ++j) {
            const auto& a = domain[i];
            const auto& b = domain[j];
            std::vector<std::uint32_t> inter, uni;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(inter));
            std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
            const double both = static_cast<double>(inter.size());
            const double either = static_cast<double>(uni.size());
            const double si = static_cast<double>(a.size());
            const double sj = static_cast<double>(b.size());

            if (either > 0)
                r.boosted_jaccard += (static_cast<double>(n) * n / (k * k)) * (1.0 - both / either);
            if (si + sj > 0) r.dice += 1.0 - 2.0 * both / (si + sj);
            const double mn = std::min(si, sj);
            if (mn > 0) {
                r.one_way_inclusion += 1.0 - both / mn;
                wo_similarity += both / mn;
            }
        }
    }

    const double m = static_cast<double>(domain.size());
    if (m >= 2) {
        const double norm = 2.0 / (m * (m - 1.0));
        r.dice *= norm;
        r.one_way_inclusion *= norm;
        r.weighted_overlap = 1.0 - norm * wo_similarity;
    }
    return r;
}

double naive_ngram_entropy_words(const std::vector<std::string>& texts, std::uint32_t n) {
    std::map<std::vector<std::string>, std::uint64_t> counts;
    std::uint64_t total = 0;
    for (const auto& text : texts) {
        std::istringstream iss(text);
        std::vector<std::string> toks;
        std::string t;
        while (iss >> t) {
            for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            toks.push_back(t);
        }
        if (toks.size() < n) continue;
        for (std::size_t i = 0; i + n <= toks.size(); ++i) {
            ++counts[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                              toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
            ++total;
        }
    }
    double h = 0.0;
    for (const auto& [key, c] : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

double naive_embedding_diversity(const std::vector<std::vector<double>>& rows) {
    double sum = 0.0;
    std::uint64_t pairs = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
            double dot = 0.0, na = 0.0, nb = 0.0;
            for (std::size_t t = 0; t < rows[i].size(); ++t) {
                dot += rows[i][t] * rows[j][t];
                na += rows[i][t] * rows[i][t];
                nb += rows[j][t] * rows[j][t];
            }
            sum += 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

}  // namespace structdiv::reference
