#include "tooldec/schema.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include <json.hpp>

#include "tooldec/validate.hpp"

namespace tooldec {

using json = nlohmann::ordered_json;

namespace {

bool has_control_byte(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x20; });
}

std::string pointer_escape(std::string_view key) {
    std::string out;
    for (char c : key) {
        if (c == '~') {
            out += "~0";
        } else if (c == '/') {
            out += "~1";
        } else {
            out += c;
        }
    }
    return out;
}

std::string join(const std::string& path, std::string_view key) { return path + "/" + pointer_escape(key); }
std::string join(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

[[noreturn]] void malformed(const std::string& path, std::string detail) {
    throw SchemaError(SchemaError::Kind::MalformedDocument, path.empty() ? "/" : path, std::move(detail));
}
[[noreturn]] void unsupported(const std::string& path, std::string detail) {
    throw SchemaError(SchemaError::Kind::UnsupportedFeature, path.empty() ? "/" : path, std::move(detail));
}
[[noreturn]] void duplicate(const std::string& path, std::string detail) {
    throw SchemaError(SchemaError::Kind::DuplicateName, path.empty() ? "/" : path, std::move(detail));
}

const json& require_key(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) malformed(path, std::string("missing key '") + key + "'");
    return *it;
}

std::string require_string(const json& v, const std::string& path) {
    if (!v.is_string()) malformed(path, "expected a string");
    return v.get<std::string>();
}

std::string optional_string(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return {};
    return require_string(*it, join(path, key));
}

std::string require_identifier(const json& v, const std::string& path) {
    std::string s = require_string(v, path);
    if (!is_identifier(s)) malformed(path, "invalid identifier '" + s + "'");
    return s;
}

void check_enum_literals(const std::vector<std::string>& literals, const std::string& path) {
    if (literals.empty()) malformed(path, "enum needs at least one literal");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < literals.size(); ++i) {
        if (has_control_byte(literals[i])) malformed(join(path, i), "control byte in enum literal");
        if (!seen.insert(literals[i]).second) duplicate(join(path, i), "duplicate enum literal '" + literals[i] + "'");
    }
}

void check_sibling_names(const std::vector<ParamSpec>& params, const std::string& path) {
    std::set<std::string_view> seen;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!seen.insert(params[i].name).second) {
            duplicate(join(path, i), "duplicate parameter name '" + params[i].name + "'");
        }
    }
}

// Example values are stored as display text: string contents for
// String/Enum, the literal text otherwise.
std::optional<std::string> example_text(const json& v, const std::string& path) {
    if (v.is_null()) return std::nullopt;
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean() || v.is_object() || v.is_array()) return v.dump();
    malformed(path, "unsupported example value");
}

void check_example(const ParamSpec& p, const std::string& path) {
    if (!p.example) return;
    const std::string& ex = *p.example;
    switch (p.type.kind) {
        case ParamType::Kind::String:
            if (has_control_byte(ex)) malformed(path, "example contains a control byte");
            return;
        case ParamType::Kind::Enum:
            if (std::find(p.type.literals.begin(), p.type.literals.end(), ex) == p.type.literals.end()) {
                malformed(path, "example '" + ex + "' is not one of the enum literals");
            }
            return;
        default: {
            ValidationReport r = validate_value_text(p.type, ex);
            if (!r.valid()) malformed(path, "example '" + ex + "' is not a valid value: " + r.message);
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// simple-json

ParamSpec simple_param(const json& v, const std::string& path);

ParamType simple_type(const json& v, const std::string& path) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "string") return ParamType::string();
        if (s == "integer") return ParamType::integer();
        if (s == "number") return ParamType::number();
        if (s == "boolean") return ParamType::boolean();
        unsupported(path, "type '" + s + "'");
    }
    if (!v.is_object()) malformed(path, "type must be a string or an object");
    if (v.size() != 1) {
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (it.key() != "enum" && it.key() != "object" && it.key() != "array") {
                unsupported(join(path, it.key()), "type constructor '" + it.key() + "'");
            }
        }
        malformed(path, "type object must have exactly one key");
    }
    const std::string key = v.begin().key();
    const json& body = v.begin().value();
    const std::string sub = join(path, key);
    if (key == "enum") {
        if (!body.is_array()) malformed(sub, "enum expects a list");
        std::vector<std::string> literals;
        for (std::size_t i = 0; i < body.size(); ++i) literals.push_back(require_string(body[i], join(sub, i)));
        check_enum_literals(literals, sub);
        return ParamType::enumeration(std::move(literals));
    }
    if (key == "object") {
        if (!body.is_array()) malformed(sub, "object expects a list of parameters");
        if (body.empty()) malformed(sub, "object needs at least one child parameter");
        std::vector<ParamSpec> children;
        for (std::size_t i = 0; i < body.size(); ++i) children.push_back(simple_param(body[i], join(sub, i)));
        check_sibling_names(children, sub);
        return ParamType::object(std::move(children));
    }
    if (key == "array") return ParamType::array(simple_type(body, sub));
    unsupported(sub, "type constructor '" + key + "'");
}

ParamSpec simple_param(const json& v, const std::string& path) {
    if (!v.is_object()) malformed(path, "parameter must be an object");
    for (auto it = v.begin(); it != v.end(); ++it) {
        const std::string& k = it.key();
        if (k != "name" && k != "type" && k != "required" && k != "description" && k != "example") {
            unsupported(join(path, k), "parameter key '" + k + "'");
        }
    }
    ParamSpec p;
    p.name = require_identifier(require_key(v, "name", path), join(path, "name"));
    p.type = simple_type(require_key(v, "type", path), join(path, "type"));
    if (auto it = v.find("required"); it != v.end()) {
        if (!it->is_boolean()) malformed(join(path, "required"), "expected a boolean");
        p.required = it->get<bool>();
    }
    p.description = optional_string(v, "description", path);
    if (auto it = v.find("example"); it != v.end()) p.example = example_text(*it, join(path, "example"));
    check_example(p, join(path, "example"));
    return p;
}

ToolSchema simple_tool(const json& v, const std::string& path) {
    if (!v.is_object()) malformed(path, "tool must be an object");
    for (auto it = v.begin(); it != v.end(); ++it) {
        const std::string& k = it.key();
        if (k != "tool_name" && k != "description" && k != "params") unsupported(join(path, k), "tool key '" + k + "'");
    }
    ToolSchema t;
    t.tool_name = require_identifier(require_key(v, "tool_name", path), join(path, "tool_name"));
    t.description = optional_string(v, "description", path);
    if (auto it = v.find("params"); it != v.end()) {
        const std::string sub = join(path, "params");
        if (!it->is_array()) malformed(sub, "params must be a list");
        for (std::size_t i = 0; i < it->size(); ++i) t.params.push_back(simple_param((*it)[i], join(sub, i)));
        check_sibling_names(t.params, sub);
    }
    return t;
}

ToolInventory parse_simple(const json& root) {
    if (!root.is_array()) malformed("/", "expected a list of tools");
    ToolInventory inv;
    for (std::size_t i = 0; i < root.size(); ++i) inv.tools.push_back(simple_tool(root[i], join("", i)));
    return inv;
}

// ---------------------------------------------------------------------------
// openapi-subset

// Keywords that only annotate a schema; they do not change which literals are
// syntactically acceptable.
const std::set<std::string, std::less<>> kAnnotationKeys = {
    "description", "title", "example", "examples", "default", "format", "deprecated", "readOnly", "writeOnly",
    "externalDocs", "xml",
};

class OpenApiReader {
public:
    explicit OpenApiReader(const json& root) : root_(root) {}

    ToolInventory read() {
        if (!root_.is_object()) malformed("/", "expected an OpenAPI document object");
        auto ver = root_.find("openapi");
        if (ver == root_.end() || !ver->is_string() || ver->get<std::string>().rfind("3", 0) != 0) {
            malformed("/openapi", "expected an OpenAPI 3.x version string");
        }
        ToolInventory inv;
        auto paths = root_.find("paths");
        if (paths == root_.end()) return inv;
        if (!paths->is_object()) malformed("/paths", "paths must be an object");
        std::set<std::string> names;
        for (auto pit = paths->begin(); pit != paths->end(); ++pit) {
            const std::string ppath = join("/paths", pit.key());
            if (!pit->is_object()) malformed(ppath, "path item must be an object");
            std::vector<ParamSpec> shared;
            if (auto sp = pit->find("parameters"); sp != pit->end()) shared = read_parameters(*sp, join(ppath, "parameters"));
            for (auto oit = pit->begin(); oit != pit->end(); ++oit) {
                const std::string& method = oit.key();
                if (!is_method(method)) {
                    if (method == "parameters" || method == "summary" || method == "description" ||
                        method.rfind("x-", 0) == 0) {
                        continue;
                    }
                    unsupported(join(ppath, method), "path item key '" + method + "'");
                }
                const std::string opath = join(ppath, method);
                ToolSchema tool = read_operation(*oit, opath, shared);
                if (!names.insert(tool.tool_name).second) {
                    duplicate(join(opath, "operationId"), "duplicate tool name '" + tool.tool_name + "'");
                }
                inv.tools.push_back(std::move(tool));
            }
        }
        return inv;
    }

private:
    static bool is_method(std::string_view m) {
        return m == "get" || m == "put" || m == "post" || m == "delete" || m == "patch" || m == "head" ||
               m == "options" || m == "trace";
    }

    ToolSchema read_operation(const json& op, const std::string& path, const std::vector<ParamSpec>& shared) {
        if (!op.is_object()) malformed(path, "operation must be an object");
        ToolSchema t;
        t.tool_name = require_identifier(require_key(op, "operationId", path), join(path, "operationId"));
        t.description = optional_string(op, "description", path);
        if (t.description.empty()) t.description = optional_string(op, "summary", path);
        t.params = shared;
        if (auto it = op.find("parameters"); it != op.end()) {
            for (auto& p : read_parameters(*it, join(path, "parameters"))) t.params.push_back(std::move(p));
        }
        if (auto it = op.find("requestBody"); it != op.end()) {
            for (auto& p : read_request_body(*it, join(path, "requestBody"))) t.params.push_back(std::move(p));
        }
        check_sibling_names(t.params, join(path, "parameters"));
        return t;
    }

    std::vector<ParamSpec> read_parameters(const json& list, const std::string& path) {
        if (!list.is_array()) malformed(path, "parameters must be a list");
        std::vector<ParamSpec> out;
        for (std::size_t i = 0; i < list.size(); ++i) {
            std::string ppath = join(path, i);
            const json& p = resolve(list[i], ppath, "#/components/parameters/");
            if (!p.is_object()) malformed(ppath, "parameter must be an object");
            if (p.contains("content")) unsupported(join(ppath, "content"), "content-typed parameter");
            ParamSpec spec;
            spec.name = require_identifier(require_key(p, "name", ppath), join(ppath, "name"));
            if (auto r = p.find("required"); r != p.end()) {
                if (!r->is_boolean()) malformed(join(ppath, "required"), "expected a boolean");
                spec.required = r->get<bool>();
            }
            spec.description = optional_string(p, "description", ppath);
            const json& schema = require_key(p, "schema", ppath);
            spec.type = read_schema(schema, join(ppath, "schema"));
            if (auto ex = p.find("example"); ex != p.end()) {
                spec.example = example_text(*ex, join(ppath, "example"));
            } else {
                spec.example = schema_example(schema, join(ppath, "schema"));
            }
            check_example(spec, join(ppath, "example"));
            out.push_back(std::move(spec));
        }
        return out;
    }

    std::vector<ParamSpec> read_request_body(const json& body_ref, const std::string& path) {
        const json& body = resolve(body_ref, path, "#/components/requestBodies/");
        if (!body.is_object()) malformed(path, "requestBody must be an object");
        const json& content = require_key(body, "content", path);
        const std::string cpath = join(path, "content");
        if (!content.is_object()) malformed(cpath, "content must be an object");
        for (auto it = content.begin(); it != content.end(); ++it) {
            if (it.key() != "application/json") unsupported(join(cpath, it.key()), "media type '" + it.key() + "'");
        }
        auto media = content.find("application/json");
        if (media == content.end()) return {};
        const std::string mpath = join(cpath, "application/json");
        const json& schema_ref = require_key(*media, "schema", mpath);
        ParamType t = read_schema(schema_ref, join(mpath, "schema"));
        if (t.kind != ParamType::Kind::Object) unsupported(join(mpath, "schema"), "non-object request body");
        return std::move(t.children);
    }

    std::optional<std::string> schema_example(const json& schema_ref, const std::string& path) {
        const json& s = resolve(schema_ref, path, "#/components/schemas/");
        if (!s.is_object()) return std::nullopt;
        auto it = s.find("example");
        if (it == s.end()) return std::nullopt;
        return example_text(*it, join(path, "example"));
    }

    ParamType read_schema(const json& schema_ref, const std::string& path) {
        std::string ref_name;
        if (schema_ref.is_object() && schema_ref.contains("$ref")) {
            ref_name = require_string(schema_ref["$ref"], join(path, "$ref"));
            if (std::find(ref_stack_.begin(), ref_stack_.end(), ref_name) != ref_stack_.end()) {
                unsupported(join(path, "$ref"), "recursive schema reference '" + ref_name + "'");
            }
            ref_stack_.push_back(ref_name);
        }
        const json& s = resolve(schema_ref, path, "#/components/schemas/");
        ParamType t = read_resolved_schema(s, path);
        if (!ref_name.empty()) ref_stack_.pop_back();
        return t;
    }

    ParamType read_resolved_schema(const json& s, const std::string& path) {
        if (!s.is_object()) malformed(path, "schema must be an object");
        for (auto it = s.begin(); it != s.end(); ++it) {
            const std::string& k = it.key();
            if (k == "type" || k == "enum" || k == "properties" || k == "required" || k == "items") continue;
            if (kAnnotationKeys.count(k) || k.rfind("x-", 0) == 0) continue;
            unsupported(join(path, k), "schema keyword '" + k + "'");
        }
        auto type_it = s.find("type");
        if (type_it == s.end()) unsupported(path, "schema without a type");
        const std::string type = require_string(*type_it, join(path, "type"));
        if (s.contains("enum") && type != "string") unsupported(join(path, "enum"), "enum on non-string type");
        if (type != "object" && (s.contains("properties") || s.contains("required"))) {
            malformed(path, "properties on a non-object schema");
        }
        if (type != "array" && s.contains("items")) malformed(join(path, "items"), "items on a non-array schema");
        if (type == "string") {
            if (auto e = s.find("enum"); e != s.end()) {
                const std::string epath = join(path, "enum");
                if (!e->is_array()) malformed(epath, "enum expects a list");
                std::vector<std::string> literals;
                for (std::size_t i = 0; i < e->size(); ++i) literals.push_back(require_string((*e)[i], join(epath, i)));
                check_enum_literals(literals, epath);
                return ParamType::enumeration(std::move(literals));
            }
            return ParamType::string();
        }
        if (type == "integer") return ParamType::integer();
        if (type == "number") return ParamType::number();
        if (type == "boolean") return ParamType::boolean();
        if (type == "array") return ParamType::array(read_schema(require_key(s, "items", path), join(path, "items")));
        if (type == "object") return read_object(s, path);
        unsupported(join(path, "type"), "type '" + type + "'");
    }

    ParamType read_object(const json& s, const std::string& path) {
        auto props = s.find("properties");
        if (props == s.end() || !props->is_object() || props->empty()) {
            unsupported(path, "object schema without properties");
        }
        std::set<std::string> required;
        if (auto r = s.find("required"); r != s.end()) {
            const std::string rpath = join(path, "required");
            if (!r->is_array()) malformed(rpath, "required must be a list");
            for (std::size_t i = 0; i < r->size(); ++i) required.insert(require_string((*r)[i], join(rpath, i)));
        }
        const std::string ppath = join(path, "properties");
        std::vector<ParamSpec> children;
        for (auto it = props->begin(); it != props->end(); ++it) {
            const std::string cpath = join(ppath, it.key());
            ParamSpec c;
            if (!is_identifier(it.key())) malformed(cpath, "invalid identifier '" + it.key() + "'");
            c.name = it.key();
            c.required = required.erase(it.key()) > 0;
            c.type = read_schema(*it, cpath);
            const json& cs = resolve(*it, cpath, "#/components/schemas/");
            c.description = cs.is_object() ? optional_string(cs, "description", cpath) : std::string{};
            c.example = schema_example(*it, cpath);
            check_example(c, join(cpath, "example"));
            children.push_back(std::move(c));
        }
        if (!required.empty()) malformed(join(path, "required"), "required names unknown property '" + *required.begin() + "'");
        return ParamType::object(std::move(children));
    }

    const json& resolve(const json& v, const std::string& path, std::string_view expected_prefix) {
        if (!v.is_object()) return v;
        auto ref = v.find("$ref");
        if (ref == v.end()) return v;
        const std::string target = require_string(*ref, join(path, "$ref"));
        if (target.rfind(expected_prefix, 0) != 0) {
            unsupported(join(path, "$ref"), "reference '" + target + "' outside " + std::string(expected_prefix));
        }
        const json* cur = &root_;
        std::string_view rest(target);
        rest.remove_prefix(2);  // "#/"
        while (!rest.empty()) {
            auto slash = rest.find('/');
            std::string key(rest.substr(0, slash));
            rest = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash + 1);
            if (!cur->is_object() || !cur->contains(key)) malformed(join(path, "$ref"), "dangling reference '" + target + "'");
            cur = &(*cur)[key];
        }
        return *cur;
    }

    const json& root_;
    std::vector<std::string> ref_stack_;
};

// ---------------------------------------------------------------------------
// canonical serialization

json type_to_json(const ParamType& t);

json param_to_json(const ParamSpec& p) {
    json j = json::object();
    j["name"] = p.name;
    j["type"] = type_to_json(p.type);
    j["required"] = p.required;
    j["description"] = p.description;
    if (p.example) j["example"] = *p.example;
    return j;
}

json type_to_json(const ParamType& t) {
    switch (t.kind) {
        case ParamType::Kind::String: return "string";
        case ParamType::Kind::Integer: return "integer";
        case ParamType::Kind::Number: return "number";
        case ParamType::Kind::Boolean: return "boolean";
        case ParamType::Kind::Enum: return json{{"enum", t.literals}};
        case ParamType::Kind::Object: {
            json children = json::array();
            for (const auto& c : t.children) children.push_back(param_to_json(c));
            return json{{"object", std::move(children)}};
        }
        case ParamType::Kind::Array: return json{{"array", type_to_json(*t.element)}};
    }
    return nullptr;
}

json tool_to_json(const ToolSchema& tool) {
    json j = json::object();
    j["tool_name"] = tool.tool_name;
    j["description"] = tool.description;
    json params = json::array();
    for (const auto& p : tool.params) params.push_back(param_to_json(p));
    j["params"] = std::move(params);
    return j;
}

}  // namespace

ParamType ParamType::enumeration(std::vector<std::string> literals) {
    ParamType t = make(Kind::Enum);
    t.literals = std::move(literals);
    return t;
}

ParamType ParamType::object(std::vector<ParamSpec> children) {
    ParamType t = make(Kind::Object);
    t.children = std::move(children);
    return t;
}

ParamType ParamType::array(ParamType element) {
    ParamType t = make(Kind::Array);
    t.element = std::make_shared<const ParamType>(std::move(element));
    return t;
}

std::size_t ParamType::depth() const {
    switch (kind) {
        case Kind::Object: {
            std::size_t d = 0;
            for (const auto& c : children) d = std::max(d, c.type.depth());
            return d + 1;
        }
        case Kind::Array: return element->depth() + 1;
        default: return 0;
    }
}

bool operator==(const ParamType& a, const ParamType& b) {
    if (a.kind != b.kind || a.literals != b.literals || a.children != b.children) return false;
    if (!a.element || !b.element) return a.element == b.element;
    return *a.element == *b.element;
}

const ToolSchema* ToolInventory::find(std::string_view name) const {
    for (const auto& t : tools) {
        if (t.tool_name == name) return &t;
    }
    return nullptr;
}

std::optional<InventoryFormat> parse_inventory_format(std::string_view name) {
    if (name == "simple-json") return InventoryFormat::SimpleJson;
    if (name == "openapi-subset") return InventoryFormat::OpenApiSubset;
    return std::nullopt;
}

SchemaError::SchemaError(Kind kind, std::string path, std::string detail)
    : std::runtime_error(std::string(to_string(kind)) + " at " + path + ": " + detail),
      kind_(kind),
      path_(std::move(path)),
      detail_(std::move(detail)) {}

const char* to_string(SchemaError::Kind kind) {
    switch (kind) {
        case SchemaError::Kind::MalformedDocument: return "MalformedDocument";
        case SchemaError::Kind::UnsupportedFeature: return "UnsupportedFeature";
        case SchemaError::Kind::DuplicateName: return "DuplicateName";
    }
    return "?";
}

bool is_identifier(std::string_view name) {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
               c == '.';
    });
}

ToolInventory parse_inventory(std::string_view document, InventoryFormat format) {
    json root;
    try {
        root = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        malformed("/", e.what());
    }
    ToolInventory inv =
        format == InventoryFormat::SimpleJson ? parse_simple(root) : OpenApiReader(root).read();
    std::set<std::string_view> names;
    for (std::size_t i = 0; i < inv.tools.size(); ++i) {
        if (!names.insert(inv.tools[i].tool_name).second) {
            duplicate(join("", i), "duplicate tool name '" + inv.tools[i].tool_name + "'");
        }
    }
    return inv;
}

std::string serialize_inventory(const ToolInventory& inventory) {
    json root = json::array();
    for (const auto& t : inventory.tools) root.push_back(tool_to_json(t));
    return root.dump(2);
}

std::string serialize_tool(const ToolSchema& tool) { return tool_to_json(tool).dump(); }

}  // namespace tooldec
