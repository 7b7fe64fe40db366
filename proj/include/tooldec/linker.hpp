#pragma once

// Tool selection and scaffold linking: a token-level name trie and the
// whole-session machine (literals, free text, names, arguments, EOS).

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tooldec/byte_dfa.hpp"
#include "tooldec/scaffold.hpp"
#include "tooldec/schema.hpp"
#include "tooldec/token_fsm.hpp"
#include "tooldec/vocab.hpp"

namespace tooldec {

class InexpressibleName : public std::runtime_error {
public:
    InexpressibleName(std::size_t tool, const std::string& name);
    std::size_t tool() const noexcept { return tool_; }

private:
    std::size_t tool_;
};

// Token automaton over `name_i + terminator`. Different tokenizations of a
// name share nodes, so it is a trie whose equal suffixes are merged; each
// tool owns exactly one leaf.
class NameTrie {
public:
    NameTrie(TokenFsm fsm, std::vector<StateId> leaf_of_tool);

    const TokenFsm& fsm() const noexcept { return fsm_; }
    StateId root() const noexcept { return fsm_.start(); }
    std::size_t leaf_count() const noexcept { return leaf_of_tool_.size(); }
    StateId leaf(std::size_t tool) const { return leaf_of_tool_.at(tool); }
    // Tool index for a leaf, -1 otherwise.
    std::int32_t tool_at(StateId s) const;
    // Tool reached by a complete token path, -1 if the path is not one.
    std::int32_t walk(std::span<const TokenId> tokens) const;

private:
    TokenFsm fsm_;
    std::vector<StateId> leaf_of_tool_;
};

inline constexpr std::string_view kReactNameTerminator = "\nAction Input: ";

NameTrie build_name_trie(const ToolInventory& inventory, const Vocabulary& v,
                         std::string_view terminator = kReactNameTerminator);

// Byte-level session language plus, per tool, the byte state where its
// argument machine starts (right after name + terminator).
struct SessionDfa {
    ByteDfa dfa;
    std::vector<StateId> tool_entry;
};

SessionDfa build_session_dfa(const ToolInventory& inventory, const ScaffoldSpec& scaffold);

class SessionFsm {
public:
    SessionFsm(TokenFsm fsm, ToolInventory inventory, ScaffoldSpec scaffold);

    const TokenFsm& fsm() const noexcept { return fsm_; }
    const ToolInventory& inventory() const noexcept { return inventory_; }
    const ScaffoldSpec& scaffold() const noexcept { return scaffold_; }

    std::int32_t segment_of(StateId s) const { return fsm_.tag(s).segment; }
    // Tool committed to in `s`, -1 while undecided or after the arguments.
    std::int32_t tool_of(StateId s) const { return fsm_.tag(s).tool; }

private:
    TokenFsm fsm_;
    ToolInventory inventory_;
    ScaffoldSpec scaffold_;
};

SessionFsm build_session_fsm(const ToolInventory& inventory, const Vocabulary& v, const ScaffoldSpec& scaffold);

}  // namespace tooldec
