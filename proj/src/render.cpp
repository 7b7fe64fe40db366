#include "tooldec/render.hpp"

#include <cstdio>

namespace tooldec {

namespace {

bool scalar_like(const ParamType& t) {
    return t.kind != ParamType::Kind::Object && t.kind != ParamType::Kind::Array;
}

void render_params(const std::vector<ParamSpec>& params, const std::string& prefix, std::string& out) {
    for (const ParamSpec& p : params) {
        std::string desc = p.description;
        while (!desc.empty() && (desc.back() == '.' || desc.back() == ' ')) desc.pop_back();
        std::string line = "   - " + prefix + p.name + ":";
        if (!desc.empty()) line += " " + desc;
        if (!p.required) line += " (Optional)";
        if (p.example && scalar_like(p.type)) line += " (Example: " + *p.example + ")";
        if (line.back() == ':') line.pop_back();
        out += line + ".\n";

        const ParamType* t = &p.type;
        while (t->kind == ParamType::Kind::Array) t = t->element.get();
        if (t->kind == ParamType::Kind::Object) render_params(t->children, prefix + p.name + ".", out);
    }
}

}  // namespace

std::string render_tool(const ToolSchema& tool, std::size_t index) {
    std::string out = std::to_string(index) + ". " + tool.tool_name + "\n\n";
    out += "   Description:";
    if (!tool.description.empty()) out += " " + tool.description;
    out += "\n";
    if (tool.params.empty()) {
        out += "   Parameters: (none)\n";
    } else {
        out += "   Parameters:\n";
        render_params(tool.params, "", out);
    }
    return out;
}

std::string render_compressed(const ToolInventory& inventory) {
    std::string out;
    for (std::size_t i = 0; i < inventory.tools.size(); ++i) {
        if (i > 0) out += "\n";
        out += render_tool(inventory.tools[i], i + 1);
    }
    return out;
}

CompressedPrompt token_stats(const ToolInventory& inventory, const Vocabulary& v) {
    CompressedPrompt result;
    result.text = render_compressed(inventory);
    double raw_sum = 0, compressed_sum = 0;
    for (std::size_t i = 0; i < inventory.tools.size(); ++i) {
        const ToolSchema& tool = inventory.tools[i];
        ToolTokenCount c;
        c.tool_name = tool.tool_name;
        c.raw_tokens = tokenize_greedy(v, serialize_tool(tool)).size();
        c.compressed_tokens = tokenize_greedy(v, render_tool(tool, i + 1)).size();
        raw_sum += double(c.raw_tokens);
        compressed_sum += double(c.compressed_tokens);
        result.per_tool.push_back(std::move(c));
    }
    if (!inventory.tools.empty()) {
        result.mean_raw_tokens = raw_sum / double(inventory.tools.size());
        result.mean_compressed_tokens = compressed_sum / double(inventory.tools.size());
    }
    return result;
}

std::string format_stats_table(const CompressedPrompt& stats) {
    std::string out = "tool_name\traw_tokens\tcompressed_tokens\tratio\n";
    char buf[32];
    for (const auto& c : stats.per_tool) {
        std::snprintf(buf, sizeof buf, "%.4f", c.ratio());
        out += c.tool_name + "\t" + std::to_string(c.raw_tokens) + "\t" + std::to_string(c.compressed_tokens) + "\t" +
               buf + "\n";
    }
    const double mean_ratio = stats.mean_raw_tokens > 0 ? stats.mean_compressed_tokens / stats.mean_raw_tokens : 0.0;
    std::snprintf(buf, sizeof buf, "%.2f\t%.2f\t%.4f", stats.mean_raw_tokens, stats.mean_compressed_tokens, mean_ratio);
    out += std::string("(mean)\t") + buf + "\n";
    return out;
}

}  // namespace tooldec
