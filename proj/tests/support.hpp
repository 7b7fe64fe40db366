#pragma once

#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "tooldec/byte_dfa.hpp"
#include "tooldec/schema.hpp"
#include "tooldec/vocab.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(TOOLDEC_FIXTURES) + "/" + name; }

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline tooldec::ToolInventory inventory(const std::string& name) {
    return tooldec::parse_inventory(read_text(fixture(name)), tooldec::InventoryFormat::SimpleJson);
}

inline const tooldec::Vocabulary& fixture_vocab() {
    static const tooldec::Vocabulary v = tooldec::load_vocab(read_text(fixture("vocab_512.json")));
    return v;
}

// Tokens in the given order, then an EOS token "<eos>".
inline tooldec::Vocabulary make_vocab(std::vector<std::string> tokens, bool byte_fallback = false) {
    tokens.push_back("<eos>");
    const auto eos = static_cast<tooldec::TokenId>(tokens.size() - 1);
    return tooldec::Vocabulary(std::move(tokens), eos, byte_fallback);
}

inline tooldec::TokenId id_of(const tooldec::Vocabulary& v, const std::string& expansion) {
    for (tooldec::TokenId i = 0; i < v.size(); ++i) {
        if (v.expansion(i) == expansion && i != v.eos()) return i;
    }
    throw std::runtime_error("no token '" + expansion + "'");
}

// Byte-by-byte walk, independent of any token structure.
inline tooldec::StateId naive_walk(const tooldec::ByteDfa& dfa, tooldec::StateId s, const std::string& bytes) {
    for (unsigned char b : bytes) {
        if (s == tooldec::kNoState) return s;
        s = dfa.next(s, b);
    }
    return s;
}

// Depth-first enumeration of all strings over `alphabet` up to `max_len`
// bytes, descending only into prefixes for which `viable` holds.
inline void enumerate_strings(const std::string& alphabet, std::size_t max_len,
                              const std::function<bool(const std::string&)>& viable,
                              const std::function<void(const std::string&)>& visit) {
    std::string cur;
    std::function<void()> rec = [&] {
        visit(cur);
        if (cur.size() == max_len) return;
        for (char c : alphabet) {
            cur.push_back(c);
            if (viable(cur)) rec();
            cur.pop_back();
        }
    };
    rec();
}

// Every token whose expansion walks from byte state `bs` without falling off,
// checked one byte at a time; EOS exactly when `bs` accepts.
inline std::vector<tooldec::TokenId> brute_force_permitted(const tooldec::ByteDfa& dfa, const tooldec::Vocabulary& v,
                                                           tooldec::StateId bs) {
    std::vector<tooldec::TokenId> out;
    for (tooldec::TokenId a = 0; a < v.size(); ++a) {
        if (a == v.eos()) {
            if (dfa.accepting(bs)) out.push_back(a);
        } else if (naive_walk(dfa, bs, v.expansion(a)) != tooldec::kNoState) {
            out.push_back(a);
        }
    }
    return out;
}

inline tooldec::ParamSpec param(std::string name, tooldec::ParamType type, bool required) {
    tooldec::ParamSpec p;
    p.name = std::move(name);
    p.type = std::move(type);
    p.required = required;
    return p;
}

inline tooldec::ToolSchema tool(std::string name, std::vector<tooldec::ParamSpec> params) {
    tooldec::ToolSchema t;
    t.tool_name = std::move(name);
    t.params = std::move(params);
    return t;
}

// The four-parameter flight_search tool, built in code.
inline tooldec::ToolSchema flight_search() {
    using tooldec::ParamType;
    return tool("flight_search", {param("from", ParamType::string(), true), param("to", ParamType::string(), true),
                                  param("adult", ParamType::integer(), true),
                                  param("type", ParamType::string(), false)});
}

}  // namespace testing
