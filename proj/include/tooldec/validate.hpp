#pragma once

// Independent recursive-descent validator for tool-call text.
//
// This never consults any automaton; tests use it as the reference the
// compiled machines are checked against. Checks are eager: the reported
// offset is the first byte at which no valid completion exists, so a
// failure whose offset equals the text length means "truncated" (the text is
// a viable prefix).

#include <cstddef>
#include <string>
#include <string_view>

#include "tooldec/scaffold.hpp"
#include "tooldec/schema.hpp"

namespace tooldec {

enum class Verdict { Valid, NameError, ArgumentError, FormatError };

const char* to_string(Verdict v);

struct ValidationReport {
    Verdict verdict = Verdict::Valid;
    std::size_t offset = 0;  // first violating byte; meaningless when Valid
    std::string message;

    bool valid() const noexcept { return verdict == Verdict::Valid; }
    // Invalid only because the input ended early.
    bool truncated(std::size_t text_size) const noexcept { return !valid() && offset == text_size; }
};

// `{"a": 1, "b": "x"}` in documentation order, whole text.
ValidationReport validate_call_text(const ToolSchema& schema, std::string_view call_text);

// `1, "x"` positional values; optional params may only be omitted as a suffix.
ValidationReport validate_positional_text(const ToolSchema& schema, std::string_view args_text);

// A single value literal of `type`, whole text.
ValidationReport validate_value_text(const ParamType& type, std::string_view value_text);

// Full scaffolded output (without the EOS token).
ValidationReport validate_session_text(const ToolInventory& inventory, const ScaffoldSpec& scaffold,
                                       std::string_view text);

}  // namespace tooldec
