#pragma once

#include <cstdint>
#include <memory>
#include <regex>
#include <string>
#include <vector>

namespace structdiv {

// Rule predicate DSL, embedded as strings in catalog files:
//
//   expr  := "regex":"PATTERN"            ECMAScript regex, searched anywhere
//          | "substring":"LITERAL"        literal containment
//          | line-count-range(MIN,MAX)    inclusive line count
//          | token-count-range(MIN,MAX)   inclusive whitespace-token count
//          | all-of(expr, expr, ...)
//          | any-of(expr, expr, ...)
//          | not(expr)
//
// Quoted strings support the escapes \" \\ \n \t. Regexes are compiled at
// parse time so bad patterns surface at catalog load, not mid-extraction.
class RulePredicate {
public:
    enum class Kind { Regex, Substring, LineCountRange, TokenCountRange, AllOf, AnyOf, Not };

    // Throws ParseError with position info on malformed specs.
    static RulePredicate parse(const std::string& spec);

    bool eval(const std::string& text) const;

    Kind kind() const { return kind_; }
    const std::vector<RulePredicate>& children() const { return children_; }

private:
    Kind kind_ = Kind::Substring;
    std::string literal_;          // Substring; also retains regex source
    std::shared_ptr<std::regex> regex_;
    std::uint64_t min_ = 0, max_ = 0;
    std::vector<RulePredicate> children_;

    friend class RuleParser;
};

std::uint64_t count_lines(const std::string& text);
std::uint64_t count_tokens(const std::string& text);

}  // namespace structdiv
