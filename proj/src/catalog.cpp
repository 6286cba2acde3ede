#include "structdiv/catalog.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "structdiv/errors.hpp"
#include "structdiv/rules.hpp"

namespace structdiv {

using nlohmann::json;

void FeatureCatalog::validate() const {
    if (features.empty()) throw ValidationError("catalog \"" + name + "\" has no features");
    std::unordered_set<std::string> seen;
    for (const auto& f : features) {
        if (f.id.empty()) throw ValidationError("catalog \"" + name + "\" has a feature with empty id");
        if (!seen.insert(f.id).second)
            throw ValidationError("catalog \"" + name + "\" has duplicate feature id \"" + f.id + "\"");
        if (f.kind == ExtractorKind::Rule) {
            try {
                RulePredicate::parse(f.spec);
            } catch (const ParseError& e) {
                throw ValidationError("feature \"" + f.id + "\": " + e.what());
            }
        }
    }
}

FeatureCatalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open catalog file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("catalog " + path + ": " + e.what());
    }

    FeatureCatalog cat;
    try {
        cat.name = doc.value("name", "");
        if (!doc.contains("features") || !doc["features"].is_array())
            throw ParseError("catalog " + path + ": missing \"features\" array");
        for (const auto& jf : doc["features"]) {
            FeatureDef f;
            f.id = jf.at("id").get<std::string>();
            f.description = jf.value("description", "");
            const auto& ex = jf.at("extractor");
            const std::string kind = ex.at("kind").get<std::string>();
            if (kind == "rule")
                f.kind = ExtractorKind::Rule;
            else if (kind == "llm-judge")
                f.kind = ExtractorKind::LlmJudge;
            else
                throw ParseError("catalog " + path + ": feature \"" + f.id +
                                 "\": unknown extractor kind \"" + kind + "\"");
            f.spec = ex.value("spec", "");
            cat.features.push_back(std::move(f));
        }
    } catch (const json::exception& e) {
        throw ParseError("catalog " + path + ": " + e.what());
    }
    cat.validate();
    return cat;
}

void save_catalog(const FeatureCatalog& catalog, const std::string& path) {
    json doc;
    doc["name"] = catalog.name;
    doc["features"] = json::array();
    for (const auto& f : catalog.features) {
        doc["features"].push_back(
            {{"id", f.id},
             {"description", f.description},
             {"extractor",
              {{"kind", f.kind == ExtractorKind::Rule ? "rule" : "llm-judge"}, {"spec", f.spec}}}});
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write catalog file: " + path);
    out << doc.dump(2) << "\n";
}

}  // namespace structdiv
