#include "tooldec/linker.hpp"

#include "grammar_nfa.hpp"

namespace tooldec {

InexpressibleName::InexpressibleName(std::size_t tool, const std::string& name)
    : std::runtime_error("InexpressibleName: vocabulary cannot spell tool name '" + name + "'"), tool_(tool) {}

NameTrie::NameTrie(TokenFsm fsm, std::vector<StateId> leaf_of_tool)
    : fsm_(std::move(fsm)), leaf_of_tool_(std::move(leaf_of_tool)) {}

std::int32_t NameTrie::tool_at(StateId s) const {
    for (std::size_t i = 0; i < leaf_of_tool_.size(); ++i) {
        if (leaf_of_tool_[i] == s) return static_cast<std::int32_t>(i);
    }
    return -1;
}

std::int32_t NameTrie::walk(std::span<const TokenId> tokens) const {
    StateId s = fsm_.start();
    for (TokenId a : tokens) {
        s = fsm_.next(s, a);
        if (s == kNoState) return -1;
    }
    return tool_at(s);
}

namespace {

using detail::Fragment;
using detail::Nfa;

// (Σ \ {anchor[0]})* anchor. Once the anchor's first byte shows up the rest
// of it is forced, which keeps the language deterministic without a
// failure function.
Fragment free_text_fragment(Nfa& n, std::int32_t segment, const std::string& anchor) {
    const auto a0 = static_cast<std::uint8_t>(anchor[0]);
    n.set_tag({segment, -1, 0});
    const auto hub = n.add_state();
    if (a0 > 0) n.add_range(hub, 0, a0 - 1, hub);
    if (a0 < 255) n.add_range(hub, a0 + 1, 255, hub);
    auto cur = hub;
    for (std::size_t j = 0; j < anchor.size(); ++j) {
        const bool last = j + 1 == anchor.size();
        n.set_tag({segment, -1, last ? -1 : static_cast<std::int32_t>(j + 1)});
        const auto next = n.add_state();
        const auto b = static_cast<std::uint8_t>(anchor[j]);
        n.add_range(cur, b, b, next);
        cur = next;
    }
    n.set_tag({segment, -1, -1});
    return {hub, cur};
}

Fragment tool_select_fragment(Nfa& n, const ToolInventory& inventory, const ScaffoldSpec& scaffold,
                              std::int32_t segment) {
    const std::string& terminator = scaffold.name_terminator();
    std::vector<Fragment> options;
    options.reserve(inventory.tools.size());
    for (std::size_t i = 0; i < inventory.tools.size(); ++i) {
        const ToolSchema& tool = inventory.tools[i];
        const auto t = static_cast<std::int32_t>(i);
        n.set_tag({segment, t, -1});
        Fragment name = n.literal(tool.tool_name);
        n.set_tag({segment + 1, t, -1});
        Fragment term = n.literal(terminator);
        n.set_tag({segment + 2, t, -1});
        Fragment args = scaffold.arg_style() == ArgStyle::Object ? detail::object_fragment(n, tool.params)
                                                                 : detail::positional_fragment(n, tool.params);
        const std::array<Fragment, 3> parts{name, term, args};
        options.push_back(n.concat(parts));
    }
    n.set_tag({segment, -1, -1});
    return n.alternation(options);
}

}  // namespace

NameTrie build_name_trie(const ToolInventory& inventory, const Vocabulary& v, std::string_view terminator) {
    if (inventory.tools.empty()) throw GrammarError("name trie needs at least one tool");
    Nfa n;
    std::vector<Fragment> options;
    for (std::size_t i = 0; i < inventory.tools.size(); ++i) {
        n.set_tag({0, static_cast<std::int32_t>(i), -1});
        options.push_back(n.concat(n.literal(inventory.tools[i].tool_name), n.literal(terminator)));
    }
    n.set_tag({});
    ByteDfa dfa = n.determinize(n.alternation(options));
    dfa.prune();

    std::vector<StateId> byte_leaf(inventory.tools.size(), kNoState);
    for (std::size_t i = 0; i < inventory.tools.size(); ++i) {
        byte_leaf[i] = dfa.walk(dfa.start(), inventory.tools[i].tool_name + std::string(terminator));
    }

    TokenFsm fsm = [&] {
        try {
            return compile_token_fsm(dfa, v, {.eos_terminal = false});
        } catch (const InexpressibleGrammar& e) {
            for (std::size_t i = 0; i < inventory.tools.size(); ++i) {
                const std::string& name = inventory.tools[i].tool_name;
                for (std::size_t k = 0; k <= name.size(); ++k) {
                    if (dfa.walk(dfa.start(), name.substr(0, k)) == e.byte_state())
                        throw InexpressibleName(i, name);
                }
            }
            throw;
        }
    }();

    std::vector<StateId> leaf(inventory.tools.size(), kNoState);
    for (StateId s = 0; s < fsm.state_count(); ++s) {
        if (!fsm.accepting(s)) continue;
        for (std::size_t i = 0; i < byte_leaf.size(); ++i) {
            if (fsm.byte_state(s) == byte_leaf[i]) leaf[i] = s;
        }
    }
    for (std::size_t i = 0; i < leaf.size(); ++i) {
        if (leaf[i] == kNoState) throw InexpressibleName(i, inventory.tools[i].tool_name);
    }
    return NameTrie(std::move(fsm), std::move(leaf));
}

namespace {

ByteDfa session_dfa(const ToolInventory& inventory, const ScaffoldSpec& scaffold) {
    if (inventory.tools.empty()) throw GrammarError("session needs at least one tool");
    Nfa n;
    std::vector<Fragment> parts;
    const auto& segments = scaffold.segments();
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto seg = static_cast<std::int32_t>(k);
        n.set_tag({seg, -1, -1});
        switch (segments[k].kind) {
            case ScaffoldSegment::Kind::Literal: parts.push_back(n.literal(segments[k].text)); break;
            case ScaffoldSegment::Kind::FreeText:
                parts.push_back(free_text_fragment(n, seg, segments[k].text));
                break;
            case ScaffoldSegment::Kind::ToolSelect:
                parts.push_back(tool_select_fragment(n, inventory, scaffold, seg));
                k += 2;  // terminator literal and arguments are part of each alternative
                break;
            case ScaffoldSegment::Kind::ArgObject:
                throw GrammarError("arg_object outside tool selection");
            case ScaffoldSegment::Kind::Terminal: break;
        }
    }
    ByteDfa dfa = n.determinize(n.concat(parts));
    dfa.prune();
    return dfa;
}

// Text of the shortest session prefix up to the tool-select segment.
std::string selection_prefix(const ScaffoldSpec& scaffold) {
    std::string out;
    for (std::size_t k = 0; k < scaffold.tool_select_index(); ++k) {
        const auto& seg = scaffold.segments()[k];
        out += seg.text;  // literal bytes, or the anchor after empty free text
    }
    return out;
}

}  // namespace

SessionDfa build_session_dfa(const ToolInventory& inventory, const ScaffoldSpec& scaffold) {
    SessionDfa out{session_dfa(inventory, scaffold), {}};
    const std::string prefix = selection_prefix(scaffold);
    for (const ToolSchema& tool : inventory.tools) {
        out.tool_entry.push_back(out.dfa.walk(out.dfa.start(), prefix + tool.tool_name + scaffold.name_terminator()));
    }
    return out;
}

SessionFsm::SessionFsm(TokenFsm fsm, ToolInventory inventory, ScaffoldSpec scaffold)
    : fsm_(std::move(fsm)), inventory_(std::move(inventory)), scaffold_(std::move(scaffold)) {}

SessionFsm build_session_fsm(const ToolInventory& inventory, const Vocabulary& v, const ScaffoldSpec& scaffold) {
    const ByteDfa dfa = session_dfa(inventory, scaffold);
    CompileOptions options;
    options.terminal_tag = {static_cast<std::int32_t>(scaffold.segments().size() - 1), -1, -1};
    return SessionFsm(compile_token_fsm(dfa, v, options), inventory, scaffold);
}

}  // namespace tooldec
