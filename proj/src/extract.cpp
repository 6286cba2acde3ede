#include "structdiv/extract.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>

#include "structdiv/chain.hpp"
#include "structdiv/errors.hpp"
#include "structdiv/rules.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace structdiv {

void JudgeConfig::validate() const {
    const auto has = [&](const char* ph) {
        return prompt_template.find(ph) != std::string::npos;
    };
    if (!has("{text}") || !has("{feature_description}"))
        throw ValidationError("judge prompt template must reference {text} and "
                              "{feature_description}");
    if (positive_markers.empty()) throw ValidationError("judge config: no positive markers");
    if (default_bit != 0 && default_bit != 1)
        throw ValidationError("judge config: default_bit must be 0 or 1");
}

namespace {

std::string lower_trimmed(const std::string& s) {
    std::size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    std::string out = s.substr(b);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool starts_with_any(const std::string& text, const std::vector<std::string>& markers) {
    for (const auto& m : markers)
        if (text.rfind(lower_trimmed(m), 0) == 0) return true;
    return false;
}

}  // namespace

ExtractionOutput extract_features(const SampleSet& set,
                                  std::shared_ptr<const FeatureCatalog> catalog,
                                  const JudgeConfig& judge, Gateway* gateway) {
    if (!catalog) throw ValidationError("extract_features: null catalog");
    catalog->validate();
    judge.validate();

    const std::uint32_t d = catalog->d();
    const std::uint32_t k = set.k();

    std::vector<RulePredicate> rules(d, RulePredicate::parse("substring:\"x\""));
    bool any_judge = false;
    for (std::uint32_t j = 0; j < d; ++j) {
        const auto& f = catalog->features[j];
        if (f.kind == ExtractorKind::Rule)
            rules[j] = RulePredicate::parse(f.spec);
        else
            any_judge = true;
    }
    if (any_judge && gateway == nullptr)
        throw ValidationError("catalog \"" + catalog->name +
                              "\" has llm-judge features but no gateway is configured");

    std::vector<std::uint8_t> bits(static_cast<std::size_t>(k) * d, 0);
    std::vector<ExtractionIncident> incidents;
    std::int64_t failed_at = -1;
    std::string failure;

#ifdef _OPENMP
    const int workers =
        any_judge && gateway ? std::max(1, std::min<int>(gateway->parallelism(), static_cast<int>(k)))
                             : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(k); ++i) {
        try {
            const auto& text = set.samples[static_cast<std::size_t>(i)].text;
            for (std::uint32_t j = 0; j < d; ++j) {
                const auto& f = catalog->features[j];
                bool bit = false;
                if (f.kind == ExtractorKind::Rule) {
                    bit = rules[j].eval(text);
                } else {
                    const std::string& description = f.spec.empty() ? f.description : f.spec;
                    std::string prompt;
                    if (description.find("{text}") != std::string::npos)
                        prompt = render_template(description, {{"text", text}});
                    else
                        prompt = render_template(judge.prompt_template,
                                                 {{"text", text},
                                                  {"feature_description", description}});
                    ChatRequest req;
                    req.messages = {{"user", prompt}};
                    req.stage = "judge:" + f.id;
                    const std::string answer =
                        gateway->chat(req, static_cast<std::uint64_t>(i) * d + j);
                    const std::string norm = lower_trimmed(answer);
                    if (starts_with_any(norm, judge.positive_markers)) {
                        bit = true;
                    } else if (starts_with_any(norm, judge.negative_markers)) {
                        bit = false;
                    } else {
                        bit = judge.default_bit != 0;
#ifdef _OPENMP
#pragma omp critical(structdiv_extract_incident)
#endif
                        incidents.push_back({static_cast<std::uint32_t>(i), j, answer});
                    }
                }
                bits[static_cast<std::size_t>(i) * d + j] = bit ? 1 : 0;
            }
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical(structdiv_extract_error)
#endif
            if (failed_at < 0 || i < failed_at) {
                failed_at = i;
                failure = e.what();
            }
        }
    }
    if (failed_at >= 0)
        throw Error("extraction failed at sample " + std::to_string(failed_at) + ": " + failure);

    ExtractionOutput out;
    out.set.catalog = std::move(catalog);
    out.set.samples = set.samples;
    for (std::uint32_t i = 0; i < k; ++i) {
        FeatureVector fv;
        for (std::uint32_t j = 0; j < d; ++j)
            if (bits[static_cast<std::size_t>(i) * d + j]) fv.bits.push_back(j);
        out.set.samples[i].features = std::move(fv);
    }
    std::sort(incidents.begin(), incidents.end(), [](const auto& a, const auto& b) {
        return a.sample != b.sample ? a.sample < b.sample : a.feature < b.feature;
    });
    out.incidents = std::move(incidents);
    return out;
}

std::vector<double> feature_prevalence(const SampleSet& set, std::ostream* warn) {
    if (set.k() == 0) throw EmptySetError("feature_prevalence on empty sample set");
    if (!set.all_features_present())
        throw ValidationError("feature_prevalence: not all samples have extracted features");

    const std::uint32_t d = set.effective_d();
    std::vector<std::uint32_t> counts(d, 0);
    for (const auto& s : set.samples)
        for (std::uint32_t b : s.features->bits) ++counts[b];

    std::vector<double> prevalence(d);
    for (std::uint32_t j = 0; j < d; ++j)
        prevalence[j] = static_cast<double>(counts[j]) / static_cast<double>(set.k());

    if (warn != nullptr) {
        for (std::uint32_t j = 0; j < d; ++j) {
            if (prevalence[j] > 0.5) {
                const std::string fid =
                    set.catalog && j < set.catalog->d() ? set.catalog->features[j].id
                                                        : std::to_string(j);
                *warn << "warning: feature \"" << fid << "\" is present in "
                      << prevalence[j] * 100.0
                      << "% of samples; the coverage rationale assumes features occur in at "
                         "most half\n";
            }
        }
    }
    return prevalence;
}

}  // namespace structdiv
