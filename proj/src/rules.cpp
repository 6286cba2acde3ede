#include "structdiv/rules.hpp"

#include <cctype>

#include "structdiv/errors.hpp"

namespace structdiv {

std::uint64_t count_lines(const std::string& text) {
    if (text.empty()) return 0;
    std::uint64_t lines = 1;
    for (char c : text)
        if (c == '\n') ++lines;
    if (text.back() == '\n') --lines;  // trailing newline does not open a new line
    return lines;
}

std::uint64_t count_tokens(const std::string& text) {
    std::uint64_t tokens = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        const bool ws = std::isspace(c) != 0;
        if (!ws && !in_token) ++tokens;
        in_token = !ws;
    }
    return tokens;
}

class RuleParser {
public:
    explicit RuleParser(const std::string& src) : src_(src) {}

    RulePredicate parse_all() {
        RulePredicate p = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail("trailing characters after predicate");
        return p;
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) {
        throw ParseError("rule spec: " + what + " at offset " + std::to_string(pos_) + " in \"" +
                         src_ + "\"");
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!consume(c)) fail(std::string("expected '") + c + "'");
    }

    std::string parse_name() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '-' ||
                src_[pos_] == '_'))
            ++pos_;
        if (start == pos_) fail("expected predicate name");
        return src_.substr(start, pos_ - start);
    }

    std::string parse_quoted() {
        expect('"');
        std::string out;
        while (pos_ < src_.size()) {
            char c = src_[pos_++];
            if (c == '"') return out;
            if (c == '\\') {
                if (pos_ >= src_.size()) fail("dangling escape");
                char e = src_[pos_++];
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    default: fail(std::string("unknown escape \\") + e);
                }
            } else {
                out += c;
            }
        }
        fail("unterminated string");
    }

    std::uint64_t parse_uint() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (start == pos_) fail("expected integer");
        return std::stoull(src_.substr(start, pos_ - start));
    }

    RulePredicate parse_expr() {
        const std::string name = parse_name();
        RulePredicate p;
        if (name == "regex" || name == "substring") {
            expect(':');
            p.literal_ = parse_quoted();
            if (name == "regex") {
                p.kind_ = RulePredicate::Kind::Regex;
                try {
                    p.regex_ = std::make_shared<std::regex>(p.literal_,
                                                            std::regex_constants::ECMAScript);
                } catch (const std::regex_error& e) {
                    fail("regex does not compile: " + std::string(e.what()));
                }
            } else {
                p.kind_ = RulePredicate::Kind::Substring;
                if (p.literal_.empty()) fail("empty substring");
            }
        } else if (name == "line-count-range" || name == "token-count-range") {
            p.kind_ = name[0] == 'l' ? RulePredicate::Kind::LineCountRange
                                     : RulePredicate::Kind::TokenCountRange;
            expect('(');
            p.min_ = parse_uint();
            expect(',');
            p.max_ = parse_uint();
            expect(')');
            if (p.min_ > p.max_) fail("empty range (min > max)");
        } else if (name == "all-of" || name == "any-of") {
            p.kind_ = name[1] == 'l' ? RulePredicate::Kind::AllOf : RulePredicate::Kind::AnyOf;
            expect('(');
            p.children_.push_back(parse_expr());
            while (consume(',')) p.children_.push_back(parse_expr());
            expect(')');
        } else if (name == "not") {
            p.kind_ = RulePredicate::Kind::Not;
            expect('(');
            p.children_.push_back(parse_expr());
            expect(')');
        } else {
            fail("unknown predicate '" + name + "'");
        }
        return p;
    }
};

RulePredicate RulePredicate::parse(const std::string& spec) {
    return RuleParser(spec).parse_all();
}

bool RulePredicate::eval(const std::string& text) const {
    switch (kind_) {
        case Kind::Regex:
            try {
                return std::regex_search(text, *regex_);
            } catch (const std::regex_error& e) {
                throw Error("rule evaluation failed for regex \"" + literal_ +
                            "\": " + e.what());
            }
        case Kind::Substring: return text.find(literal_) != std::string::npos;
        case Kind::LineCountRange: {
            const std::uint64_t n = count_lines(text);
            return n >= min_ && n <= max_;
        }
        case Kind::TokenCountRange: {
            const std::uint64_t n = count_tokens(text);
            return n >= min_ && n <= max_;
        }
        case Kind::AllOf:
            for (const auto& c : children_)
                if (!c.eval(text)) return false;
            return true;
        case Kind::AnyOf:
            for (const auto& c : children_)
                if (c.eval(text)) return true;
            return false;
        case Kind::Not: return !children_.front().eval(text);
    }
    return false;
}

}  // namespace structdiv
