#include "tooldec/validate.hpp"

#include <algorithm>
#include <optional>

namespace tooldec {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Valid: return "Valid";
        case Verdict::NameError: return "NameError";
        case Verdict::ArgumentError: return "ArgumentError";
        case Verdict::FormatError: return "FormatError";
    }
    return "?";
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string escape_literal(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

bool all_optional(const std::vector<ParamSpec>& params, std::size_t from) {
    return std::none_of(params.begin() + static_cast<std::ptrdiff_t>(from), params.end(),
                        [](const ParamSpec& p) { return p.required; });
}

// Schema-directed parser over the whole input. Every check runs at the
// earliest byte that decides it, so the failure offset is the length of the
// longest viable prefix.
class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ValidationReport report() const {
        if (!failure_) return {};
        return *failure_;
    }

    bool at_end() const { return pos_ >= text_.size(); }
    std::size_t pos() const { return pos_; }

    bool fail(Verdict v, std::string message) {
        failure_ = ValidationReport{v, pos_, std::move(message)};
        return false;
    }
    bool fail_eof() { return fail(Verdict::FormatError, "unexpected end of input"); }

    bool expect_end(const char* what) {
        if (!at_end()) return fail(Verdict::FormatError, what);
        return true;
    }

    bool expect_literal(std::string_view lit, const char* what) {
        for (char c : lit) {
            if (at_end()) return fail_eof();
            if (text_[pos_] != c) {
                std::string message = "expected ";
                message += what;
                return fail(Verdict::FormatError, std::move(message));
            }
            ++pos_;
        }
        return true;
    }

    void skip() { ++pos_; }

    void optional_space() {
        if (!at_end() && text_[pos_] == ' ') ++pos_;
    }

    bool call_object(const std::vector<ParamSpec>& params) {
        if (at_end()) return fail_eof();
        if (text_[pos_] != '{') return fail(Verdict::FormatError, "expected '{' to open the arguments");
        ++pos_;
        return members(params);
    }

    bool value(const ParamType& t) {
        if (at_end()) return fail_eof();
        switch (t.kind) {
            case ParamType::Kind::String: return string_value();
            case ParamType::Kind::Integer: return number_value(false);
            case ParamType::Kind::Number: return number_value(true);
            case ParamType::Kind::Boolean: return boolean_value();
            case ParamType::Kind::Enum: return enum_value(t.literals);
            case ParamType::Kind::Object:
                if (text_[pos_] != '{') return fail(Verdict::ArgumentError, "expected an object");
                ++pos_;
                return members(t.children);
            case ParamType::Kind::Array: return array_value(*t.element);
        }
        return false;
    }

    // Values separated by ",", optional params omitted only as a suffix. The
    // list ends where the following literal `closer` begins.
    bool positional(const std::vector<ParamSpec>& params, std::string_view closer) {
        if (params.empty()) return true;
        if (all_optional(params, 0)) {
            if (at_end()) return fail_eof();
            if (!closer.empty() && text_[pos_] == closer.front()) return true;
        }
        for (std::size_t i = 0;; ++i) {
            if (!value(params[i].type)) return false;
            const bool can_more = i + 1 < params.size();
            const bool can_end = all_optional(params, i + 1);
            if (at_end()) return fail_eof();
            const char c = text_[pos_];
            if (c == ',') {
                if (!can_more) return fail(Verdict::ArgumentError, "too many arguments");
                ++pos_;
                optional_space();
                continue;
            }
            if (can_end) return true;
            if (!closer.empty() && c == closer.front()) {
                return fail(Verdict::ArgumentError, "missing required argument '" + params[i + 1].name + "'");
            }
            return fail(Verdict::FormatError, "expected ','");
        }
    }

    std::optional<std::size_t> tool_name(const ToolInventory& inv, std::string_view terminator) {
        std::vector<std::size_t> cands(inv.tools.size());
        for (std::size_t i = 0; i < cands.size(); ++i) cands[i] = i;
        for (std::size_t k = 0;; ++k) {
            for (std::size_t i : cands) {
                if (inv.tools[i].tool_name.size() + terminator.size() == k) return i;
            }
            if (at_end()) {
                fail_eof();
                return std::nullopt;
            }
            const char c = text_[pos_];
            const bool name_complete = std::any_of(cands.begin(), cands.end(), [&](std::size_t i) {
                return inv.tools[i].tool_name.size() <= k;
            });
            std::vector<std::size_t> next;
            for (std::size_t i : cands) {
                const std::string& name = inv.tools[i].tool_name;
                const char want = k < name.size() ? name[k] : terminator[k - name.size()];
                if (want == c) next.push_back(i);
            }
            if (next.empty()) {
                if (name_complete) fail(Verdict::FormatError, "expected the tool name terminator");
                else fail(Verdict::NameError, "no tool with this name");
                return std::nullopt;
            }
            cands = std::move(next);
            ++pos_;
        }
    }

private:
    bool members(const std::vector<ParamSpec>& params) {
        std::size_t next = 0;
        bool emitted = false;
        for (;;) {
            if (at_end()) return fail_eof();
            char c = text_[pos_];
            if (c == '}') {
                for (std::size_t i = next; i < params.size(); ++i) {
                    if (params[i].required) {
                        return fail(Verdict::ArgumentError, "missing required parameter '" + params[i].name + "'");
                    }
                }
                ++pos_;
                return true;
            }
            if (emitted) {
                if (c != ',') return fail(Verdict::FormatError, "expected ',' or '}'");
                if (next == params.size()) return fail(Verdict::ArgumentError, "no further parameters accepted");
                ++pos_;
                optional_space();
                if (at_end()) return fail_eof();
                c = text_[pos_];
            }
            if (c != '"') return fail(Verdict::FormatError, "expected a parameter name");
            if (next == params.size()) return fail(Verdict::ArgumentError, "no parameters accepted here");
            ++pos_;
            auto matched = member_name(params, next);
            if (!matched) return false;
            next = *matched + 1;
            emitted = true;
            if (at_end()) return fail_eof();
            if (text_[pos_] != ':') return fail(Verdict::FormatError, "expected ':'");
            ++pos_;
            optional_space();
            if (!value(params[*matched].type)) return false;
        }
    }

    // Candidates run from `next` up to and including the first required
    // parameter; anything else would break documentation order.
    std::optional<std::size_t> member_name(const std::vector<ParamSpec>& params, std::size_t next) {
        std::vector<std::size_t> cands;
        for (std::size_t i = next; i < params.size(); ++i) {
            cands.push_back(i);
            if (params[i].required) break;
        }
        for (std::size_t k = 0;; ++k) {
            if (at_end()) {
                fail_eof();
                return std::nullopt;
            }
            const char c = text_[pos_];
            if (c == '"') {
                for (std::size_t i : cands) {
                    if (params[i].name.size() == k) {
                        ++pos_;
                        return i;
                    }
                }
            }
            std::vector<std::size_t> keep;
            for (std::size_t i : cands) {
                if (params[i].name.size() > k && params[i].name[k] == c) keep.push_back(i);
            }
            if (keep.empty()) {
                std::string allowed;
                for (std::size_t i : cands) allowed += (allowed.empty() ? "" : ", ") + params[i].name;
                fail(Verdict::ArgumentError, "unknown or out-of-order parameter (allowed here: " + allowed + ")");
                return std::nullopt;
            }
            cands = std::move(keep);
            ++pos_;
        }
    }

    bool string_value() {
        if (text_[pos_] != '"') return fail(Verdict::ArgumentError, "expected a string");
        ++pos_;
        for (;;) {
            if (at_end()) return fail_eof();
            const unsigned char c = static_cast<unsigned char>(text_[pos_]);
            if (c == '"') {
                ++pos_;
                return true;
            }
            if (c < 0x20) return fail(Verdict::FormatError, "control byte in string");
            if (c == '\\') {
                ++pos_;
                if (at_end()) return fail_eof();
                if (text_[pos_] != '"' && text_[pos_] != '\\') {
                    return fail(Verdict::FormatError, "unsupported escape sequence");
                }
            }
            ++pos_;
        }
    }

    // Reads one number literal; stops (successfully) at the first byte that
    // cannot extend it. End of input is not a failure here: the caller decides
    // whether something must follow.
    bool number_value(bool allow_fraction) {
        const char* kind = allow_fraction ? "expected a number" : "expected an integer";
        char c = text_[pos_];
        if (c != '-' && !is_digit(c)) return fail(Verdict::ArgumentError, kind);
        if (c == '-') {
            ++pos_;
            if (at_end()) return fail_eof();
            if (!is_digit(text_[pos_])) return fail(Verdict::FormatError, "expected a digit after '-'");
        }
        if (text_[pos_] == '0') {
            ++pos_;
            if (!at_end() && is_digit(text_[pos_])) return fail(Verdict::FormatError, "leading zero");
        } else {
            while (!at_end() && is_digit(text_[pos_])) ++pos_;
        }
        if (at_end()) return true;
        c = text_[pos_];
        if (c == '.' || c == 'e' || c == 'E') {
            if (!allow_fraction) return fail(Verdict::ArgumentError, "expected an integer, found a fraction or exponent");
        }
        if (c == '.') {
            ++pos_;
            if (at_end()) return fail_eof();
            if (!is_digit(text_[pos_])) return fail(Verdict::FormatError, "expected a digit after '.'");
            while (!at_end() && is_digit(text_[pos_])) ++pos_;
            if (at_end()) return true;
            c = text_[pos_];
        }
        if (c == 'e' || c == 'E') {
            ++pos_;
            if (at_end()) return fail_eof();
            if (text_[pos_] == '+' || text_[pos_] == '-') {
                ++pos_;
                if (at_end()) return fail_eof();
            }
            if (!is_digit(text_[pos_])) return fail(Verdict::FormatError, "expected an exponent digit");
            while (!at_end() && is_digit(text_[pos_])) ++pos_;
        }
        return true;
    }

    bool boolean_value() {
        const char c = text_[pos_];
        if (c != 't' && c != 'f') return fail(Verdict::ArgumentError, "expected a boolean");
        return expect_literal(c == 't' ? "true" : "false", "'true' or 'false'");
    }

    bool enum_value(const std::vector<std::string>& literals) {
        if (text_[pos_] != '"') return fail(Verdict::ArgumentError, "expected one of the enum literals");
        ++pos_;
        std::vector<std::string> cands;
        for (const auto& l : literals) cands.push_back(escape_literal(l));
        for (std::size_t k = 0;; ++k) {
            if (at_end()) return fail_eof();
            const char c = text_[pos_];
            if (c == '"' && std::any_of(cands.begin(), cands.end(), [&](const std::string& s) { return s.size() == k; })) {
                ++pos_;
                return true;
            }
            std::vector<std::string> keep;
            for (auto& s : cands) {
                if (s.size() > k && s[k] == c) keep.push_back(std::move(s));
            }
            if (keep.empty()) return fail(Verdict::ArgumentError, "value is not one of the enum literals");
            cands = std::move(keep);
            ++pos_;
        }
    }

    bool array_value(const ParamType& element) {
        if (text_[pos_] != '[') return fail(Verdict::ArgumentError, "expected an array");
        ++pos_;
        if (at_end()) return fail_eof();
        if (text_[pos_] == ']') {
            ++pos_;
            return true;
        }
        for (;;) {
            if (!value(element)) return false;
            if (at_end()) return fail_eof();
            const char c = text_[pos_];
            if (c == ']') {
                ++pos_;
                return true;
            }
            if (c != ',') return fail(Verdict::FormatError, "expected ',' or ']'");
            ++pos_;
            optional_space();
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::optional<ValidationReport> failure_;
};

}  // namespace

ValidationReport validate_call_text(const ToolSchema& schema, std::string_view call_text) {
    Parser p(call_text);
    if (p.call_object(schema.params)) p.expect_end("trailing bytes after the arguments");
    return p.report();
}

ValidationReport validate_positional_text(const ToolSchema& schema, std::string_view args_text) {
    if (schema.params.empty()) {
        Parser p(args_text);
        p.expect_end("tool takes no arguments");
        return p.report();
    }
    // At end of input the list may legitimately be complete; a sentinel closer
    // makes "complete" and "truncated" distinguishable.
    std::string text(args_text);
    text += '\x01';
    Parser q(text);
    if (q.positional(schema.params, "\x01")) {
        if (q.pos() != args_text.size()) {
            q.fail(Verdict::FormatError, "expected ',' or end of arguments");
        }
    }
    ValidationReport r = q.report();
    if (!r.valid() && r.offset > args_text.size()) r.offset = args_text.size();
    return r;
}

ValidationReport validate_value_text(const ParamType& type, std::string_view value_text) {
    Parser p(value_text);
    if (p.value(type)) p.expect_end("trailing bytes after the value");
    return p.report();
}

ValidationReport validate_session_text(const ToolInventory& inventory, const ScaffoldSpec& scaffold,
                                       std::string_view text) {
    using Kind = ScaffoldSegment::Kind;
    Parser p(text);
    const auto& segs = scaffold.segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const ScaffoldSegment& seg = segs[i];
        switch (seg.kind) {
            case Kind::Literal:
                if (!p.expect_literal(seg.text, "scaffold literal")) return p.report();
                break;
            case Kind::FreeText:
                for (;;) {
                    if (p.at_end()) {
                        p.fail_eof();
                        return p.report();
                    }
                    if (text[p.pos()] == seg.text.front()) break;
                    p.skip();
                }
                if (!p.expect_literal(seg.text, "the free-text terminator")) return p.report();
                break;
            case Kind::ToolSelect: {
                auto tool = p.tool_name(inventory, scaffold.name_terminator());
                if (!tool) return p.report();
                const ToolSchema& schema = inventory.tools[*tool];
                const ScaffoldSegment& args = segs[i + 2];
                bool ok = false;
                if (args.style == ArgStyle::Object) {
                    ok = p.call_object(schema.params);
                } else {
                    const std::string_view closer =
                        i + 3 < segs.size() && segs[i + 3].kind == Kind::Literal ? std::string_view(segs[i + 3].text)
                                                                                : std::string_view{};
                    ok = p.positional(schema.params, closer);
                }
                if (!ok) return p.report();
                i += 2;
                break;
            }
            case Kind::ArgObject: break;  // consumed with ToolSelect
            case Kind::Terminal:
                p.expect_end("trailing bytes after the end of the scaffold");
                return p.report();
        }
    }
    return p.report();
}

}  // namespace tooldec
