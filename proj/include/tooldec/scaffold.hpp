#pragma once

// Generation scaffold: the ordered segments a session walks through
// (literal text, free reasoning text, tool selection, arguments, EOS).

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tooldec {

enum class ArgStyle {
    Object,      // {"name": value, ...}
    Positional,  // value, value, ...
};

struct ScaffoldSegment {
    enum class Kind { Literal, FreeText, ToolSelect, ArgObject, Terminal };

    Kind kind = Kind::Literal;
    std::string text;  // literal bytes, or the FreeText terminator anchor
    ArgStyle style = ArgStyle::Object;

    static ScaffoldSegment literal(std::string bytes) { return {Kind::Literal, std::move(bytes)}; }
    static ScaffoldSegment free_text(std::string anchor) { return {Kind::FreeText, std::move(anchor)}; }
    static ScaffoldSegment tool_select() { return {Kind::ToolSelect, {}}; }
    static ScaffoldSegment arg_object(ArgStyle s = ArgStyle::Object) { return {Kind::ArgObject, {}, s}; }
    static ScaffoldSegment terminal() { return {Kind::Terminal, {}}; }

    friend bool operator==(const ScaffoldSegment&, const ScaffoldSegment&) = default;
};

class ScaffoldError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ScaffoldSpec {
public:
    // Throws ScaffoldError unless:
    //  - exactly one tool_select, followed by a non-empty literal (the name
    //    terminator) and then the single arg_object;
    //  - the terminator does not start with an identifier byte;
    //  - every free_text anchor is non-empty;
    //  - exactly one terminal, and it is the last segment.
    explicit ScaffoldSpec(std::vector<ScaffoldSegment> segments);

    // Thought: <free text>\nAction: <tool>\nAction Input: {...}\n<EOS>
    static ScaffoldSpec react();
    // <tool>(<positional args>)<EOS>
    static ScaffoldSpec bare_call();

    const std::vector<ScaffoldSegment>& segments() const noexcept { return segments_; }
    std::size_t tool_select_index() const noexcept { return tool_select_; }
    std::size_t arg_object_index() const noexcept { return tool_select_ + 2; }
    const std::string& name_terminator() const { return segments_[tool_select_ + 1].text; }
    ArgStyle arg_style() const { return segments_[arg_object_index()].style; }

    friend bool operator==(const ScaffoldSpec&, const ScaffoldSpec&) = default;

private:
    std::vector<ScaffoldSegment> segments_;
    std::size_t tool_select_ = 0;
};

// [{"literal": "Thought: "}, {"free_text_until": "\nAction: "},
//  {"tool_select": true}, {"literal": "\nAction Input: "},
//  {"arg_object": true | "object" | "positional"}, {"literal": "\n"},
//  {"terminal": true}]
ScaffoldSpec parse_scaffold(std::string_view document);
std::string serialize_scaffold(const ScaffoldSpec& scaffold);

}  // namespace tooldec
