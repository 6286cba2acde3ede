#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "structdiv/llm.hpp"
#include "structdiv/samples.hpp"

namespace structdiv {

struct StageOverrides {
    std::optional<double> temperature;
    std::optional<double> top_p;
};

// One prompt stage. The template may reference outputs of strictly earlier
// stages as {stage_name}.
struct ChainStage {
    std::string name;
    std::string template_text;
    StageOverrides overrides;
};

// An ordered prompt chain: a 1-stage chain is plain random sampling, a
// 2-stage chain samples a specification first, longer chains refine the
// specification level by level. The last stage produces the sample text.
struct ChainConfig {
    std::string name;
    std::vector<ChainStage> stages;

    void validate() const;
    static ChainConfig load(const std::string& path);
    nlohmann::json to_json() const;
};

// Substitutes {identifier} placeholders from vars. Unknown placeholders
// raise TemplateError; brace sequences that are not identifiers pass through
// verbatim.
std::string render_template(const std::string& tmpl, const std::map<std::string, std::string>& vars);

// Identifiers referenced by a template, in order of first appearance.
std::vector<std::string> template_placeholders(const std::string& tmpl);

// Executes the chain once per sample. Stage j of sample i uses
// sample_index = i * stages + j, so every (sample, stage) call is a distinct
// draw. Samples may run concurrently up to the gateway's parallelism bound;
// the output is ordered and deterministic for a given gateway behavior.
// Intermediate stage outputs are recorded in each record's provenance.
SampleSet run_chain(const ChainConfig& chain, std::uint32_t sample_count, Gateway& gateway);

}  // namespace structdiv
