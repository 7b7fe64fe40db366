#pragma once

// Compressed, syntax-free tool documentation for prompts, and token counts
// comparing it with the raw schema text.

#include <cstddef>
#include <string>
#include <vector>

#include "tooldec/schema.hpp"
#include "tooldec/vocab.hpp"

namespace tooldec {

// One tool entry, numbered `index` (1-based), without a trailing blank line.
std::string render_tool(const ToolSchema& tool, std::size_t index);

// Entries separated by blank lines; empty inventory gives "".
std::string render_compressed(const ToolInventory& inventory);

struct ToolTokenCount {
    std::string tool_name;
    std::size_t raw_tokens = 0;
    std::size_t compressed_tokens = 0;
    double ratio() const { return raw_tokens ? double(compressed_tokens) / double(raw_tokens) : 0.0; }
};

struct CompressedPrompt {
    std::string text;
    std::vector<ToolTokenCount> per_tool;
    double mean_raw_tokens = 0.0;
    double mean_compressed_tokens = 0.0;
};

// Raw text is the compact canonical schema of each tool. Throws
// VocabError(Untokenizable) when either text cannot be tokenized.
CompressedPrompt token_stats(const ToolInventory& inventory, const Vocabulary& v);

// Tab-separated rows: tool_name, raw_tokens, compressed_tokens, ratio.
std::string format_stats_table(const CompressedPrompt& stats);

}  // namespace tooldec
