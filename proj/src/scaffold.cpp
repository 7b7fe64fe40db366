#include "tooldec/scaffold.hpp"

#include <json.hpp>

#include "tooldec/schema.hpp"

namespace tooldec {

using json = nlohmann::ordered_json;

ScaffoldSpec::ScaffoldSpec(std::vector<ScaffoldSegment> segments) : segments_(std::move(segments)) {
    using Kind = ScaffoldSegment::Kind;
    std::size_t selects = 0, args = 0, terminals = 0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& seg = segments_[i];
        switch (seg.kind) {
            case Kind::ToolSelect:
                ++selects;
                tool_select_ = i;
                break;
            case Kind::ArgObject: ++args; break;
            case Kind::Terminal:
                ++terminals;
                if (i + 1 != segments_.size()) throw ScaffoldError("terminal must be the last segment");
                break;
            case Kind::FreeText:
                if (seg.text.empty()) throw ScaffoldError("free_text_until needs a non-empty anchor");
                break;
            case Kind::Literal: break;
        }
    }
    if (selects != 1) throw ScaffoldError("scaffold needs exactly one tool_select");
    if (args != 1) throw ScaffoldError("scaffold needs exactly one arg_object");
    if (terminals != 1) throw ScaffoldError("scaffold needs exactly one terminal");
    if (tool_select_ + 2 >= segments_.size() || segments_[tool_select_ + 1].kind != Kind::Literal ||
        segments_[tool_select_ + 2].kind != Kind::ArgObject) {
        throw ScaffoldError("tool_select must be followed by a literal name terminator and then arg_object");
    }
    const std::string& term = segments_[tool_select_ + 1].text;
    if (term.empty()) throw ScaffoldError("name terminator literal must be non-empty");
    if (is_identifier(term.substr(0, 1))) {
        throw ScaffoldError("name terminator must not start with an identifier character");
    }
    if (arg_style() == ArgStyle::Positional) {
        const std::size_t after = arg_object_index() + 1;
        if (segments_[after].kind != Kind::Literal || segments_[after].text.empty() ||
            std::string_view("\"-0123456789tf{[").find(segments_[after].text.front()) != std::string_view::npos) {
            throw ScaffoldError("positional arguments must be followed by a non-empty literal that cannot start a value");
        }
    }
}

ScaffoldSpec ScaffoldSpec::react() {
    return ScaffoldSpec({
        ScaffoldSegment::literal("Thought: "),
        ScaffoldSegment::free_text("\nAction: "),
        ScaffoldSegment::tool_select(),
        ScaffoldSegment::literal("\nAction Input: "),
        ScaffoldSegment::arg_object(ArgStyle::Object),
        ScaffoldSegment::literal("\n"),
        ScaffoldSegment::terminal(),
    });
}

ScaffoldSpec ScaffoldSpec::bare_call() {
    return ScaffoldSpec({
        ScaffoldSegment::literal(""),
        ScaffoldSegment::tool_select(),
        ScaffoldSegment::literal("("),
        ScaffoldSegment::arg_object(ArgStyle::Positional),
        ScaffoldSegment::literal(")"),
        ScaffoldSegment::terminal(),
    });
}

ScaffoldSpec parse_scaffold(std::string_view document) {
    json root;
    try {
        root = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        throw ScaffoldError(std::string("malformed scaffold: ") + e.what());
    }
    if (!root.is_array()) throw ScaffoldError("scaffold must be a list of segments");
    std::vector<ScaffoldSegment> segments;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const json& s = root[i];
        const std::string where = "segment " + std::to_string(i);
        if (!s.is_object() || s.size() != 1) throw ScaffoldError(where + ": expected an object with one key");
        const std::string key = s.begin().key();
        const json& v = s.begin().value();
        if (key == "literal" || key == "free_text_until") {
            if (!v.is_string()) throw ScaffoldError(where + ": '" + key + "' expects a string");
            segments.push_back(key == "literal" ? ScaffoldSegment::literal(v.get<std::string>())
                                                : ScaffoldSegment::free_text(v.get<std::string>()));
        } else if (key == "tool_select" || key == "terminal") {
            if (v != true) throw ScaffoldError(where + ": '" + key + "' expects true");
            segments.push_back(key == "tool_select" ? ScaffoldSegment::tool_select() : ScaffoldSegment::terminal());
        } else if (key == "arg_object") {
            if (v == true || v == "object") {
                segments.push_back(ScaffoldSegment::arg_object(ArgStyle::Object));
            } else if (v == "positional") {
                segments.push_back(ScaffoldSegment::arg_object(ArgStyle::Positional));
            } else {
                throw ScaffoldError(where + ": arg_object expects true, \"object\" or \"positional\"");
            }
        } else {
            throw ScaffoldError(where + ": unknown segment '" + key + "'");
        }
    }
    return ScaffoldSpec(std::move(segments));
}

std::string serialize_scaffold(const ScaffoldSpec& scaffold) {
    json root = json::array();
    for (const auto& seg : scaffold.segments()) {
        switch (seg.kind) {
            case ScaffoldSegment::Kind::Literal: root.push_back({{"literal", seg.text}}); break;
            case ScaffoldSegment::Kind::FreeText: root.push_back({{"free_text_until", seg.text}}); break;
            case ScaffoldSegment::Kind::ToolSelect: root.push_back({{"tool_select", true}}); break;
            case ScaffoldSegment::Kind::ArgObject:
                root.push_back({{"arg_object", seg.style == ArgStyle::Object ? "object" : "positional"}});
                break;
            case ScaffoldSegment::Kind::Terminal: root.push_back({{"terminal", true}}); break;
        }
    }
    return root.dump();
}

}  // namespace tooldec
