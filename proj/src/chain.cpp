#include "structdiv/chain.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>

#include "structdiv/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace structdiv {

using nlohmann::json;

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Finds {identifier} at position i; returns the identifier or empty.
std::string placeholder_at(const std::string& s, std::size_t i, std::size_t& end) {
    if (s[i] != '{' || i + 1 >= s.size() || !is_ident_start(s[i + 1])) return {};
    std::size_t j = i + 1;
    while (j < s.size() && is_ident_char(s[j])) ++j;
    if (j >= s.size() || s[j] != '}') return {};
    end = j + 1;
    return s.substr(i + 1, j - i - 1);
}

}  // namespace

std::vector<std::string> template_placeholders(const std::string& tmpl) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        std::size_t end = 0;
        const std::string name = placeholder_at(tmpl, i, end);
        if (!name.empty()) {
            if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
            i = end - 1;
        }
    }
    return out;
}

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        std::size_t end = 0;
        const std::string name = placeholder_at(tmpl, i, end);
        if (name.empty()) {
            out += tmpl[i];
            continue;
        }
        const auto it = vars.find(name);
        if (it == vars.end())
            throw TemplateError("template references unknown placeholder {" + name + "}");
        out += it->second;
        i = end - 1;
    }
    return out;
}

void ChainConfig::validate() const {
    if (stages.empty()) throw ValidationError("chain \"" + name + "\" has no stages");
    std::set<std::string> earlier;
    for (const auto& st : stages) {
        if (st.name.empty() || !is_ident_start(st.name[0]) ||
            !std::all_of(st.name.begin(), st.name.end(), is_ident_char))
            throw ValidationError("chain \"" + name + "\": stage name \"" + st.name +
                                  "\" is not an identifier");
        if (earlier.count(st.name))
            throw ValidationError("chain \"" + name + "\": duplicate stage \"" + st.name + "\"");
        if (st.template_text.empty())
            throw ValidationError("chain \"" + name + "\": stage \"" + st.name +
                                  "\" has an empty template");
        for (const auto& ph : template_placeholders(st.template_text))
            if (!earlier.count(ph))
                throw ValidationError("chain \"" + name + "\": stage \"" + st.name +
                                      "\" references {" + ph +
                                      "}, which is not an earlier stage");
        earlier.insert(st.name);
    }
}

ChainConfig ChainConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open chain config: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("chain config " + path + ": " + e.what());
    }
    ChainConfig c;
    try {
        c.name = doc.value("name", "");
        for (const auto& js : doc.at("stages")) {
            ChainStage st;
            st.name = js.at("name").get<std::string>();
            st.template_text = js.at("template").get<std::string>();
            if (js.contains("overrides")) {
                const auto& ov = js["overrides"];
                if (ov.contains("temperature")) st.overrides.temperature = ov["temperature"].get<double>();
                if (ov.contains("top_p")) st.overrides.top_p = ov["top_p"].get<double>();
            }
            c.stages.push_back(std::move(st));
        }
    } catch (const json::exception& e) {
        throw ParseError("chain config " + path + ": " + e.what());
    }
    c.validate();
    return c;
}

json ChainConfig::to_json() const {
    json stages_json = json::array();
    for (const auto& st : stages) {
        json js{{"name", st.name}, {"template", st.template_text}};
        if (st.overrides.temperature || st.overrides.top_p) {
            json ov = json::object();
            if (st.overrides.temperature) ov["temperature"] = *st.overrides.temperature;
            if (st.overrides.top_p) ov["top_p"] = *st.overrides.top_p;
            js["overrides"] = ov;
        }
        stages_json.push_back(js);
    }
    return {{"name", name}, {"stages", stages_json}};
}

SampleSet run_chain(const ChainConfig& chain, std::uint32_t sample_count, Gateway& gateway) {
    chain.validate();
    const std::uint32_t num_stages = static_cast<std::uint32_t>(chain.stages.size());

    SampleSet out;
    out.samples.resize(sample_count);

    std::int64_t failed_at = -1;
    std::string failure;

#ifdef _OPENMP
    const int workers = std::max(1, std::min<int>(gateway.parallelism(),
                                                  static_cast<int>(sample_count)));
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(sample_count); ++i) {
        try {
            std::map<std::string, std::string> ctx;
            std::string last;
            for (std::uint32_t j = 0; j < num_stages; ++j) {
                const auto& stage = chain.stages[j];
                std::string prompt;
                try {
                    prompt = render_template(stage.template_text, ctx);
                } catch (const TemplateError& e) {
                    throw TemplateError("sample " + std::to_string(i) + ", stage \"" +
                                        stage.name + "\": " + e.what());
                }
                ChatRequest req;
                req.messages = {{"user", prompt}};
                req.temperature = stage.overrides.temperature;
                req.top_p = stage.overrides.top_p;
                req.stage = stage.name;
                try {
                    last = gateway.chat(req, static_cast<std::uint64_t>(i) * num_stages + j);
                } catch (const Error& e) {
                    throw GatewayError("sample " + std::to_string(i) + ", stage \"" + stage.name +
                                       "\": " + e.what());
                }
                ctx[stage.name] = last;
            }
            SampleRecord rec;
            char id[16];
            std::snprintf(id, sizeof(id), "s%06lld", static_cast<long long>(i));
            rec.id = id;
            rec.text = last;
            ctx.erase(chain.stages.back().name);  // final output is the text, not provenance
            rec.provenance = std::move(ctx);
            out.samples[static_cast<std::size_t>(i)] = std::move(rec);
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical(structdiv_chain_error)
#endif
            if (failed_at < 0 || i < failed_at) {
                failed_at = i;
                failure = e.what();
            }
        }
    }
    if (failed_at >= 0) throw GatewayError(failure);
    return out;
}

}  // namespace structdiv
