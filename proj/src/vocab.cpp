#include "tooldec/vocab.hpp"

#include <algorithm>
#include <array>
#include <map>

#include <openssl/evp.h>

#include <json.hpp>

namespace tooldec {

namespace {

const char* kind_name(VocabError::Kind k) {
    switch (k) {
        case VocabError::Kind::MalformedVocab: return "MalformedVocab";
        case VocabError::Kind::EmptyExpansion: return "EmptyExpansion";
        case VocabError::Kind::MissingEos: return "MissingEos";
        case VocabError::Kind::Untokenizable: return "Untokenizable";
    }
    return "?";
}

std::string base64_decode(std::string_view in, std::size_t index) {
    if (in.size() % 4 != 0) {
        throw VocabError(VocabError::Kind::MalformedVocab, index, "base64 length is not a multiple of 4");
    }
    std::string out(in.size() / 4 * 3, '\0');
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(in.data()), static_cast<int>(in.size()));
    if (n < 0) throw VocabError(VocabError::Kind::MalformedVocab, index, "invalid base64");
    std::size_t pad = 0;
    if (!in.empty() && in.back() == '=') ++pad;
    if (in.size() > 1 && in[in.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

std::string base64_encode(std::string_view in) {
    std::string out((in.size() + 2) / 3 * 4, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(in.data()), static_cast<int>(in.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

}  // namespace

VocabError::VocabError(Kind kind, std::size_t where, const std::string& detail)
    : std::runtime_error(std::string(kind_name(kind)) + ": " + detail), kind_(kind), where_(where) {}

TokenTrie::TokenTrie(const std::vector<std::string>& expansions, TokenId skip) {
    struct Building {
        std::map<std::uint8_t, std::uint32_t> children;
        std::vector<TokenId> tokens;
    };
    std::vector<Building> nodes(1);
    for (TokenId id = 0; id < expansions.size(); ++id) {
        if (id == skip) continue;
        std::uint32_t cur = kRoot;
        for (unsigned char b : expansions[id]) {
            auto it = nodes[cur].children.find(b);
            if (it == nodes[cur].children.end()) {
                const auto next = static_cast<std::uint32_t>(nodes.size());
                nodes[cur].children.emplace(b, next);
                nodes.emplace_back();
                cur = next;
            } else {
                cur = it->second;
            }
        }
        nodes[cur].tokens.push_back(id);
    }
    child_begin_.reserve(nodes.size() + 1);
    token_begin_.reserve(nodes.size() + 1);
    for (const auto& n : nodes) {
        child_begin_.push_back(static_cast<std::uint32_t>(child_byte_.size()));
        token_begin_.push_back(static_cast<std::uint32_t>(token_.size()));
        for (const auto& [b, c] : n.children) {
            child_byte_.push_back(b);
            child_node_.push_back(c);
        }
        token_.insert(token_.end(), n.tokens.begin(), n.tokens.end());
    }
    child_begin_.push_back(static_cast<std::uint32_t>(child_byte_.size()));
    token_begin_.push_back(static_cast<std::uint32_t>(token_.size()));
}

std::uint32_t TokenTrie::child(std::uint32_t node, std::uint8_t byte) const {
    auto bytes = child_bytes(node);
    auto it = std::lower_bound(bytes.begin(), bytes.end(), byte);
    if (it == bytes.end() || *it != byte) return kNone;
    return child_nodes(node)[static_cast<std::size_t>(it - bytes.begin())];
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) noexcept {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::uint64_t fingerprint_of(const std::vector<std::string>& expansions, TokenId eos, bool byte_fallback) {
    auto u64 = [](std::uint64_t v) {
        std::string s(8, '\0');
        for (int i = 0; i < 8; ++i) s[static_cast<std::size_t>(i)] = static_cast<char>(v >> (8 * i));
        return s;
    };
    std::uint64_t h = fnv1a64(u64(expansions.size()));
    h = fnv1a64(u64(eos), h);
    h = fnv1a64(u64(byte_fallback ? 1 : 0), h);
    for (const auto& e : expansions) {
        h = fnv1a64(u64(e.size()), h);
        h = fnv1a64(e, h);
    }
    return h;
}

void check_invariants(const std::vector<std::string>& expansions, TokenId eos, bool byte_fallback) {
    if (expansions.empty()) throw VocabError(VocabError::Kind::MalformedVocab, 0, "vocabulary is empty");
    for (std::size_t i = 0; i < expansions.size(); ++i) {
        if (expansions[i].empty()) {
            throw VocabError(VocabError::Kind::EmptyExpansion, i, "token " + std::to_string(i) + " has an empty expansion");
        }
    }
    if (eos >= expansions.size()) {
        throw VocabError(VocabError::Kind::MissingEos, eos, "eos id " + std::to_string(eos) + " is out of range");
    }
    if (byte_fallback) {
        std::array<bool, 256> seen{};
        for (std::size_t i = 0; i < expansions.size(); ++i) {
            if (i != eos && expansions[i].size() == 1) seen[static_cast<unsigned char>(expansions[i][0])] = true;
        }
        for (std::size_t b = 0; b < 256; ++b) {
            if (!seen[b]) {
                throw VocabError(VocabError::Kind::MalformedVocab, b,
                                 "byte_fallback set but byte " + std::to_string(b) + " has no single-byte token");
            }
        }
    }
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> expansions, TokenId eos, bool byte_fallback)
    : expansions_((check_invariants(expansions, eos, byte_fallback), std::move(expansions))),
      eos_(eos),
      byte_fallback_(byte_fallback),
      fingerprint_(fingerprint_of(expansions_, eos, byte_fallback)),
      trie_(expansions_, eos) {}

std::string Vocabulary::detokenize(std::span<const TokenId> tokens) const {
    std::string out;
    for (TokenId t : tokens) {
        if (t == eos_) continue;
        out += expansions_.at(t);
    }
    return out;
}

Vocabulary load_vocab(std::string_view document) {
    using json = nlohmann::json;
    json root;
    try {
        root = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        throw VocabError(VocabError::Kind::MalformedVocab, 0, e.what());
    }
    if (!root.is_object() || !root.contains("tokens") || !root["tokens"].is_array()) {
        throw VocabError(VocabError::Kind::MalformedVocab, 0, "expected an object with a 'tokens' list");
    }
    if (!root.contains("eos")) throw VocabError(VocabError::Kind::MissingEos, 0, "no 'eos' declaration");
    if (!root["eos"].is_number_unsigned()) {
        throw VocabError(VocabError::Kind::MalformedVocab, 0, "'eos' must be a non-negative integer");
    }
    bool byte_fallback = false;
    if (root.contains("byte_fallback")) {
        if (!root["byte_fallback"].is_boolean()) {
            throw VocabError(VocabError::Kind::MalformedVocab, 0, "'byte_fallback' must be a boolean");
        }
        byte_fallback = root["byte_fallback"].get<bool>();
    }
    std::vector<std::string> expansions;
    const json& tokens = root["tokens"];
    expansions.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!tokens[i].is_string()) {
            throw VocabError(VocabError::Kind::MalformedVocab, i, "token " + std::to_string(i) + " is not a string");
        }
        expansions.push_back(base64_decode(tokens[i].get<std::string>(), i));
    }
    return Vocabulary(std::move(expansions), root["eos"].get<TokenId>(), byte_fallback);
}

std::string serialize_vocab(const Vocabulary& v) {
    nlohmann::ordered_json root;
    auto tokens = nlohmann::ordered_json::array();
    for (const auto& e : v.expansions()) tokens.push_back(base64_encode(e));
    root["tokens"] = std::move(tokens);
    root["eos"] = v.eos();
    root["byte_fallback"] = v.byte_fallback();
    return root.dump();
}

std::vector<TokenId> tokenize_greedy(const Vocabulary& v, std::string_view text) {
    const TokenTrie& trie = v.trie();
    std::vector<TokenId> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::uint32_t node = TokenTrie::kRoot;
        std::size_t best_len = 0;
        TokenId best = 0;
        for (std::size_t i = pos; i < text.size(); ++i) {
            node = trie.child(node, static_cast<std::uint8_t>(text[i]));
            if (node == TokenTrie::kNone) break;
            if (auto toks = trie.tokens(node); !toks.empty()) {
                best_len = i - pos + 1;
                best = toks.front();
            }
        }
        if (best_len == 0) {
            throw VocabError(VocabError::Kind::Untokenizable, pos, "no token matches at byte offset " + std::to_string(pos));
        }
        out.push_back(best);
        pos += best_len;
    }
    return out;
}

}  // namespace tooldec
