#pragma once

// Byte-level call grammars built structurally from the schema model.
//
// Whitespace: one optional space after ':' and after ','; nowhere else.
// Strings admit only the escapes \" and \\ and no bytes below 0x20.

#include "tooldec/byte_dfa.hpp"
#include "tooldec/schema.hpp"

namespace tooldec {

// Literal language of a value type. Throws GrammarError for a type that
// violates its invariants (empty enum, childless object, missing element).
ByteDfa build_value_dfa(const ParamType& type);

// `"<name>":` + optional space + value.
ByteDfa build_param_machine(const ParamSpec& param);

// `{` params in documentation order joined by `,` `}`; optional params may be skipped.
ByteDfa build_tool_call_dfa(const ToolSchema& schema);

// Comma-separated positional values; optional params may be omitted as a suffix.
ByteDfa build_positional_call_dfa(const ToolSchema& schema);

}  // namespace tooldec
