#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tooldec {

using TokenId = std::uint32_t;

class VocabError : public std::runtime_error {
public:
    enum class Kind { MalformedVocab, EmptyExpansion, MissingEos, Untokenizable };

    VocabError(Kind kind, std::size_t where, const std::string& detail);

    Kind kind() const noexcept { return kind_; }
    // Token id for EmptyExpansion, byte offset for Untokenizable.
    std::size_t where() const noexcept { return where_; }

private:
    Kind kind_;
    std::size_t where_;
};

// Byte trie over token expansions (EOS excluded), children sorted by byte.
class TokenTrie {
public:
    static constexpr std::uint32_t kRoot = 0;

    explicit TokenTrie(const std::vector<std::string>& expansions, TokenId skip);

    std::size_t node_count() const noexcept { return child_begin_.size() - 1; }
    std::span<const std::uint8_t> child_bytes(std::uint32_t node) const {
        return {child_byte_.data() + child_begin_[node], child_begin_[node + 1] - child_begin_[node]};
    }
    std::span<const std::uint32_t> child_nodes(std::uint32_t node) const {
        return {child_node_.data() + child_begin_[node], child_begin_[node + 1] - child_begin_[node]};
    }
    // Tokens whose expansion ends exactly at `node`, ascending.
    std::span<const TokenId> tokens(std::uint32_t node) const {
        return {token_.data() + token_begin_[node], token_begin_[node + 1] - token_begin_[node]};
    }
    // kNone when there is no child for `byte`.
    std::uint32_t child(std::uint32_t node, std::uint8_t byte) const;

    static constexpr std::uint32_t kNone = 0xffffffffu;

private:
    std::vector<std::uint32_t> child_begin_;
    std::vector<std::uint8_t> child_byte_;
    std::vector<std::uint32_t> child_node_;
    std::vector<std::uint32_t> token_begin_;
    std::vector<TokenId> token_;
};

// Token id -> raw byte expansion. Ids are dense and follow file order.
class Vocabulary {
public:
    Vocabulary(std::vector<std::string> expansions, TokenId eos, bool byte_fallback);

    std::size_t size() const noexcept { return expansions_.size(); }
    TokenId eos() const noexcept { return eos_; }
    bool byte_fallback() const noexcept { return byte_fallback_; }
    const std::string& expansion(TokenId id) const { return expansions_.at(id); }
    const std::vector<std::string>& expansions() const noexcept { return expansions_; }
    const TokenTrie& trie() const noexcept { return trie_; }

    // Stable 64-bit FNV-1a over eos, flag and every expansion (length-prefixed).
    std::uint64_t fingerprint() const noexcept { return fingerprint_; }

    // Concatenated expansions. EOS contributes nothing.
    std::string detokenize(std::span<const TokenId> tokens) const;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.eos_ == b.eos_ && a.byte_fallback_ == b.byte_fallback_ && a.expansions_ == b.expansions_;
    }

private:
    std::vector<std::string> expansions_;
    TokenId eos_;
    bool byte_fallback_;
    std::uint64_t fingerprint_;
    TokenTrie trie_;
};

// {"tokens": [base64, ...], "eos": <index>, "byte_fallback": <bool>}
Vocabulary load_vocab(std::string_view document);
std::string serialize_vocab(const Vocabulary& v);

// Longest-match segmentation; EOS never matches text. Throws
// VocabError(Untokenizable) with the offset of the first uncovered byte.
std::vector<TokenId> tokenize_greedy(const Vocabulary& v, std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

}  // namespace tooldec
