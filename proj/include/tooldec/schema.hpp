#pragma once

// Tool documentation model: tools, parameters and their value types.

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tooldec {

struct ParamSpec;

struct ParamType {
    enum class Kind { String, Integer, Number, Boolean, Enum, Object, Array };

    Kind kind = Kind::String;
    std::vector<std::string> literals;            // Enum only
    std::vector<ParamSpec> children;              // Object only
    std::shared_ptr<const ParamType> element;     // Array only

    static ParamType string() { return {}; }
    static ParamType integer() { return make(Kind::Integer); }
    static ParamType number() { return make(Kind::Number); }
    static ParamType boolean() { return make(Kind::Boolean); }
    static ParamType enumeration(std::vector<std::string> literals);
    static ParamType object(std::vector<ParamSpec> children);
    static ParamType array(ParamType element);

    // 0 for scalars and enums, 1 + deepest child for objects and arrays.
    std::size_t depth() const;

    friend bool operator==(const ParamType& a, const ParamType& b);

private:
    static ParamType make(Kind k) {
        ParamType t;
        t.kind = k;
        return t;
    }
};

struct ParamSpec {
    std::string name;
    ParamType type;
    bool required = false;
    std::string description;
    std::optional<std::string> example;

    friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

struct ToolSchema {
    std::string tool_name;
    std::string description;
    std::vector<ParamSpec> params;

    friend bool operator==(const ToolSchema&, const ToolSchema&) = default;
};

struct ToolInventory {
    std::vector<ToolSchema> tools;

    const ToolSchema* find(std::string_view name) const;

    friend bool operator==(const ToolInventory&, const ToolInventory&) = default;
};

enum class InventoryFormat { SimpleJson, OpenApiSubset };

std::optional<InventoryFormat> parse_inventory_format(std::string_view name);

class SchemaError : public std::runtime_error {
public:
    enum class Kind { MalformedDocument, UnsupportedFeature, DuplicateName };

    SchemaError(Kind kind, std::string path, std::string detail);

    Kind kind() const noexcept { return kind_; }
    const std::string& path() const noexcept { return path_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    Kind kind_;
    std::string path_;
    std::string detail_;
};

const char* to_string(SchemaError::Kind kind);

ToolInventory parse_inventory(std::string_view document, InventoryFormat format);

// Canonical simple-json rendering; parse_inventory(serialize_inventory(x)) == x.
std::string serialize_inventory(const ToolInventory& inventory);
std::string serialize_tool(const ToolSchema& tool);

// Tool and parameter names: non-empty, [A-Za-z0-9_.-] only.
bool is_identifier(std::string_view name);

}  // namespace tooldec
