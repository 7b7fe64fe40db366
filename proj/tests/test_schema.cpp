#include <doctest.h>

#include "support.hpp"
#include "tooldec/scaffold.hpp"
#include "tooldec/schema.hpp"
#include "tooldec/validate.hpp"

using namespace tooldec;
using testing::fixture;
using testing::read_text;

namespace {

ToolInventory simple(const std::string& doc) { return parse_inventory(doc, InventoryFormat::SimpleJson); }

SchemaError::Kind simple_error(const std::string& doc) {
    try {
        simple(doc);
    } catch (const SchemaError& e) {
        return e.kind();
    }
    FAIL("expected a SchemaError");
    return SchemaError::Kind::MalformedDocument;
}

}  // namespace

TEST_CASE("flight_search document parses into four ordered params") {
    const ToolInventory inv = testing::inventory("flight_search.json");
    REQUIRE(inv.tools.size() == 1);
    const ToolSchema& t = inv.tools[0];
    CHECK(t.tool_name == "flight_search");
    REQUIRE(t.params.size() == 4);
    CHECK(t.params[0].name == "from");
    CHECK(t.params[1].name == "to");
    CHECK(t.params[2].name == "adult");
    CHECK(t.params[3].name == "type");
    CHECK(t.params[0].type.kind == ParamType::Kind::String);
    CHECK(t.params[2].type.kind == ParamType::Kind::Integer);
    CHECK(t.params[0].required);
    CHECK(t.params[2].required);
    CHECK_FALSE(t.params[3].required);
    CHECK(t.params[2].example == "2");
}

TEST_CASE("zero-parameter tool and empty inventory") {
    const auto inv = simple(R"([{"tool_name": "get_date", "description": "d", "params": []}])");
    REQUIRE(inv.tools.size() == 1);
    CHECK(inv.tools[0].params.empty());
    CHECK(simple("[]").tools.empty());
}

TEST_CASE("duplicate sibling names are rejected") {
    CHECK(simple_error(R"([{"tool_name": "t", "params": [
        {"name": "from", "type": "string"}, {"name": "from", "type": "integer"}]}])") ==
          SchemaError::Kind::DuplicateName);
    CHECK(simple_error(R"([{"tool_name": "t", "params": []}, {"tool_name": "t", "params": []}])") ==
          SchemaError::Kind::DuplicateName);
    CHECK(simple_error(R"([{"tool_name": "t", "params": [{"name": "o", "type": {"object": [
        {"name": "x", "type": "string"}, {"name": "x", "type": "string"}]}}]}])") ==
          SchemaError::Kind::DuplicateName);
    CHECK(simple_error(R"([{"tool_name": "t", "params": [{"name": "e", "type": {"enum": ["a", "a"]}}]}])") ==
          SchemaError::Kind::DuplicateName);
}

TEST_CASE("malformed and unsupported simple-json documents") {
    using K = SchemaError::Kind;
    CHECK(simple_error("{not json") == K::MalformedDocument);
    CHECK(simple_error(R"({"tool_name": "t"})") == K::MalformedDocument);
    CHECK(simple_error(R"([{"tool_name": "", "params": []}])") == K::MalformedDocument);
    CHECK(simple_error(R"([{"tool_name": "bad name", "params": []}])") == K::MalformedDocument);
    CHECK(simple_error(R"([{"tool_name": "t", "params": [{"name": "x", "type": "date"}]}])") == K::UnsupportedFeature);
    CHECK(simple_error(R"([{"tool_name": "t", "params": [{"name": "x", "type": {"oneOf": []}}]}])") ==
          K::UnsupportedFeature);
    CHECK(simple_error(R"([{"tool_name": "t", "params": [{"name": "x", "type": "string", "pattern": "a+"}]}])") ==
          K::UnsupportedFeature);
    CHECK(simple_error(R"([{"tool_name": "t", "params": [{"name": "x", "type": {"enum": []}}]}])") ==
          K::MalformedDocument);
    CHECK(simple_error(R"([{"tool_name": "t", "params": [{"name": "x", "type": {"object": []}}]}])") ==
          K::MalformedDocument);
}

TEST_CASE("examples must belong to the parameter's value language") {
    using K = SchemaError::Kind;
    CHECK_NOTHROW(simple(R"([{"tool_name": "t", "params": [{"name": "n", "type": "integer", "example": 2}]}])"));
    CHECK(simple_error(R"([{"tool_name": "t", "params": [{"name": "n", "type": "integer", "example": "two"}]}])") ==
          K::MalformedDocument);
    CHECK(simple_error(R"([{"tool_name": "t", "params": [{"name": "n", "type": "integer", "example": 2.5}]}])") ==
          K::MalformedDocument);
    CHECK(simple_error(
              R"([{"tool_name": "t", "params": [{"name": "c", "type": {"enum": ["a", "b"]}, "example": "z"}]}])") ==
          K::MalformedDocument);
    CHECK_NOTHROW(
        simple(R"([{"tool_name": "t", "params": [{"name": "c", "type": {"enum": ["a", "b"]}, "example": "b"}]}])"));
}

TEST_CASE("nesting depth is recorded") {
    const auto inv = testing::inventory("inventory_10.json");
    const ToolSchema* hotel = inv.find("hotel_booking");
    REQUIRE(hotel);
    CHECK(hotel->params[3].type.depth() == 1);
    CHECK(hotel->params[0].type.depth() == 0);
    const ToolSchema* email = inv.find("send_email");
    REQUIRE(email);
    CHECK(email->params[0].type.kind == ParamType::Kind::Array);
    CHECK(email->params[0].type.depth() == 1);
}

TEST_CASE("round trip through canonical serialization") {
    for (const char* name : {"flight_search.json", "airport_arrivals.json", "inventory_10.json"}) {
        CAPTURE(name);
        const ToolInventory a = testing::inventory(name);
        const std::string text = serialize_inventory(a);
        const ToolInventory b = simple(text);
        CHECK(a == b);
        CHECK(serialize_inventory(b) == text);
    }
}

TEST_CASE("openapi subset") {
    const auto inv = parse_inventory(read_text(fixture("openapi_sample.json")), InventoryFormat::OpenApiSubset);
    REQUIRE(inv.tools.size() == 2);
    const ToolSchema& f = inv.tools[0];
    CHECK(f.tool_name == "flight_search");
    CHECK(f.description == "Search for flights between two airports.");
    REQUIRE(f.params.size() == 4);
    CHECK(f.params[0].name == "from");
    CHECK(f.params[0].example == "LAX");
    CHECK(f.params[2].name == "adult");
    CHECK(f.params[2].type.kind == ParamType::Kind::Integer);
    CHECK(f.params[2].required);
    CHECK(f.params[3].type.kind == ParamType::Kind::Enum);
    CHECK_FALSE(f.params[3].required);

    const ToolSchema& h = inv.tools[1];
    CHECK(h.tool_name == "hotel_booking");
    REQUIRE(h.params.size() == 4);
    CHECK(h.params[0].required);
    CHECK(h.params[2].type.kind == ParamType::Kind::Object);
    CHECK(h.params[2].type.children[0].required);
    CHECK_FALSE(h.params[2].type.children[1].required);
    CHECK(h.params[3].type.kind == ParamType::Kind::Array);

    // Round-trips through the canonical simple-json form.
    CHECK(simple(serialize_inventory(inv)) == inv);
}

TEST_CASE("openapi conditional schemas are reported, not dropped") {
    const std::string doc = R"({"openapi": "3.0.0", "paths": {"/x": {"get": {"operationId": "x",
        "parameters": [{"name": "a", "in": "query", "schema": {"oneOf": [{"type": "string"}]}}]}}}})";
    try {
        parse_inventory(doc, InventoryFormat::OpenApiSubset);
        FAIL("expected UnsupportedFeature");
    } catch (const SchemaError& e) {
        CHECK(e.kind() == SchemaError::Kind::UnsupportedFeature);
        CHECK(e.path().find("oneOf") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_inventory(R"({"swagger": "2.0"})", InventoryFormat::OpenApiSubset), SchemaError);
}

TEST_CASE("validate_call_text examples") {
    const ToolSchema fs = testing::flight_search();
    CHECK(validate_call_text(fs, R"({"from": "LAX", "to": "JFK", "adult": 2})").valid());
    CHECK(validate_call_text(fs, R"({"from": "LAX", "to": "JFK", "adult": 2, "type": "economy"})").valid());
    CHECK(validate_call_text(fs, R"({"from":"LAX","to":"JFK","adult":2})").valid());

    const std::string wrong_type = R"({"from": "LAX", "to": "JFK", "adult": "two"})";
    auto r = validate_call_text(fs, wrong_type);
    CHECK(r.verdict == Verdict::ArgumentError);
    CHECK(r.offset == wrong_type.find("\"two\""));

    const std::string reordered = R"({"to": "JFK", "from": "LAX", "adult": 2})";
    r = validate_call_text(fs, reordered);
    CHECK(r.verdict == Verdict::ArgumentError);
    CHECK(r.offset == 2);  // the 't' of "to" where "from" is required

    r = validate_call_text(fs, R"({"from": "LAX", "to": "JFK"})");
    CHECK(r.verdict == Verdict::ArgumentError);

    const std::string truncated = R"({"from": "LAX", "to": "JF)";
    r = validate_call_text(fs, truncated);
    CHECK(r.verdict == Verdict::FormatError);
    CHECK(r.truncated(truncated.size()));

    r = validate_call_text(fs, R"({"from": "LAX",  "to": "JFK", "adult": 2})");
    CHECK(r.verdict == Verdict::FormatError);
    CHECK(r.offset == 16);

    CHECK(validate_call_text(testing::tool("z", {}), "{}").valid());
    CHECK_FALSE(validate_call_text(testing::tool("z", {}), "{ }").valid());
}

TEST_CASE("value literals") {
    CHECK(validate_value_text(ParamType::integer(), "-17").valid());
    CHECK(validate_value_text(ParamType::integer(), "0").valid());
    CHECK_FALSE(validate_value_text(ParamType::integer(), "01").valid());
    CHECK_FALSE(validate_value_text(ParamType::integer(), "-").valid());
    CHECK(validate_value_text(ParamType::number(), "-0.5e+10").valid());
    CHECK_FALSE(validate_value_text(ParamType::number(), "1.").valid());
    CHECK_FALSE(validate_value_text(ParamType::number(), ".5").valid());
    CHECK(validate_value_text(ParamType::string(), R"("a\"b\\c")").valid());
    CHECK_FALSE(validate_value_text(ParamType::string(), R"("a\nb")").valid());
    CHECK_FALSE(validate_value_text(ParamType::string(), "\"a\tb\"").valid());
    CHECK(validate_value_text(ParamType::enumeration({"economy", "business"}), "\"business\"").valid());
    CHECK(validate_value_text(ParamType::enumeration({"economy", "business"}), "\"bus").truncated(4));
    CHECK(validate_value_text(ParamType::array(ParamType::integer()), "[1, 2,3]").valid());
    CHECK(validate_value_text(ParamType::array(ParamType::integer()), "[]").valid());
    CHECK_FALSE(validate_value_text(ParamType::array(ParamType::integer()), "[1,]").valid());
}

TEST_CASE("session text error classes") {
    const ToolInventory inv = testing::inventory("flight_search.json");
    const ScaffoldSpec react = ScaffoldSpec::react();
    const std::string good =
        "Thought: need flights\nAction: flight_search\nAction Input: {\"from\": \"LAX\", \"to\": \"JFK\", \"adult\": 2}\n";
    CHECK(validate_session_text(inv, react, good).valid());

    auto r = validate_session_text(inv, react, "Thought: x\nAction: hotel_search\nAction Input: {}\n");
    CHECK(r.verdict == Verdict::NameError);
    CHECK(r.offset == 19);

    r = validate_session_text(inv, react, "Thinking: x\nAction: flight_search\n");
    CHECK(r.verdict == Verdict::FormatError);

    r = validate_session_text(inv, react,
                              "Thought: x\nAction: flight_search\nAction Input: {\"from\": 1, \"to\": \"JFK\", \"adult\": 2}\n");
    CHECK(r.verdict == Verdict::ArgumentError);
}

TEST_CASE("scaffold configuration") {
    const ScaffoldSpec react = parse_scaffold(read_text(fixture("react_scaffold.json")));
    CHECK(react == ScaffoldSpec::react());
    CHECK(parse_scaffold(serialize_scaffold(react)) == react);
    const ScaffoldSpec bare = parse_scaffold(read_text(fixture("bare_call_scaffold.json")));
    CHECK(bare == ScaffoldSpec::bare_call());
    CHECK(bare.arg_style() == ArgStyle::Positional);
    CHECK(bare.name_terminator() == "(");

    CHECK_THROWS_AS(parse_scaffold(R"([{"literal": "x"}, {"terminal": true}])"), ScaffoldError);
    CHECK_THROWS_AS(parse_scaffold(R"([{"free_text_until": ""}, {"tool_select": true}, {"literal": ":"},
        {"arg_object": true}, {"terminal": true}])"),
                    ScaffoldError);
    CHECK_THROWS_AS(parse_scaffold(R"([{"tool_select": true}, {"arg_object": true}, {"terminal": true}])"),
                    ScaffoldError);
    CHECK_THROWS_AS(parse_scaffold(R"([{"tool_select": true}, {"literal": "x"}, {"arg_object": true},
        {"terminal": true}])"),
                    ScaffoldError);
    CHECK_THROWS_AS(parse_scaffold(R"([{"tool_select": true}, {"literal": ":"}, {"arg_object": true},
        {"terminal": true}, {"literal": "x"}])"),
                    ScaffoldError);
}
