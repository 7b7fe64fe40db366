#include "tooldec/token_fsm.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <deque>
#include <unordered_map>

namespace tooldec {

InexpressibleGrammar::InexpressibleGrammar(StateId byte_state, std::string sample_required_bytes)
    : std::runtime_error("InexpressibleGrammar: vocabulary cannot spell a completion from byte state " +
                         std::to_string(byte_state) + " (needs e.g. \"" + sample_required_bytes + "\")"),
      byte_state_(byte_state),
      sample_(std::move(sample_required_bytes)) {}

std::size_t TokenMask::count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

TokenFsm::TokenFsm(Parts parts) : p_(std::move(parts)) {
    const std::size_t n = p_.accepting.size();
    if (n == 0 || p_.tags.size() != n || p_.byte_state.size() != n || p_.offsets.size() != n + 1)
        throw std::invalid_argument("token fsm: inconsistent state tables");
    if (p_.start >= n) throw std::invalid_argument("token fsm: start out of range");
    if (p_.vocab_size == 0 || p_.eos >= p_.vocab_size) throw std::invalid_argument("token fsm: bad eos");
    if (p_.offsets.front() != 0 || p_.offsets.back() != p_.tokens.size() || p_.tokens.size() != p_.targets.size())
        throw std::invalid_argument("token fsm: inconsistent transition tables");
    words_per_state_ = (p_.vocab_size + 63) / 64;
    masks_.assign(n * words_per_state_, 0);
    for (StateId s = 0; s < n; ++s) {
        if (p_.offsets[s] > p_.offsets[s + 1]) throw std::invalid_argument("token fsm: offsets not monotone");
        std::uint64_t* row = masks_.data() + s * words_per_state_;
        for (std::uint32_t i = p_.offsets[s]; i < p_.offsets[s + 1]; ++i) {
            const TokenId a = p_.tokens[i];
            if (a >= p_.vocab_size || p_.targets[i] >= n) throw std::invalid_argument("token fsm: edge out of range");
            if (i > p_.offsets[s] && p_.tokens[i - 1] >= a)
                throw std::invalid_argument("token fsm: transitions not sorted");
            row[a >> 6] |= std::uint64_t{1} << (a & 63);
        }
    }
}

StateId TokenFsm::next(StateId s, TokenId a) const {
    const auto toks = tokens(s);
    auto it = std::lower_bound(toks.begin(), toks.end(), a);
    if (it == toks.end() || *it != a) return kNoState;
    return p_.targets[p_.offsets[s] + static_cast<std::uint32_t>(it - toks.begin())];
}

std::vector<StateId> TokenFsm::free_text_states() const {
    std::vector<StateId> out;
    for (StateId s = 0; s < state_count(); ++s) {
        if (is_free_text(s) && mask(s).all()) out.push_back(s);
    }
    return out;
}

bool TokenFsm::accepts(std::span<const TokenId> toks) const {
    StateId s = p_.start;
    for (TokenId a : toks) {
        s = next(s, a);
        if (s == kNoState) return false;
    }
    return accepting(s);
}

std::vector<std::pair<TokenId, StateId>> token_walks(const ByteDfa& dfa, const Vocabulary& v, StateId s) {
    std::vector<std::pair<TokenId, StateId>> out;
    const TokenTrie& trie = v.trie();
    // Joint DFS over trie and automaton: each trie node is visited at most once.
    std::vector<std::pair<std::uint32_t, StateId>> stack{{TokenTrie::kRoot, s}};
    while (!stack.empty()) {
        auto [node, state] = stack.back();
        stack.pop_back();
        if (node != TokenTrie::kRoot) {
            for (TokenId a : trie.tokens(node)) out.emplace_back(a, state);
        }
        const auto bytes = trie.child_bytes(node);
        const auto kids = trie.child_nodes(node);
        for (std::size_t i = 0; i < bytes.size(); ++i) {
            const StateId t = dfa.next(state, bytes[i]);
            if (t != kNoState) stack.emplace_back(kids[i], t);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::uint64_t> compute_token_mask(const ByteDfa& dfa, const Vocabulary& v, StateId s) {
    std::vector<std::uint64_t> words((v.size() + 63) / 64, 0);
    for (const auto& [a, t] : token_walks(dfa, v, s)) words[a >> 6] |= std::uint64_t{1} << (a & 63);
    return words;
}

TokenFsm compile_token_fsm(const ByteDfa& dfa, const Vocabulary& v, const CompileOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr StateId kTerminal = kNoState;  // byte-state key of the post-EOS state

    TokenFsm::Parts p;
    p.vocab_size = v.size();
    p.eos = v.eos();
    p.start = 0;
    p.offsets.push_back(0);

    std::unordered_map<StateId, StateId> id_of;  // byte state -> token state
    std::vector<StateId> order;
    auto intern = [&](StateId byte_state) {
        auto [it, fresh] = id_of.emplace(byte_state, static_cast<StateId>(order.size()));
        if (fresh) order.push_back(byte_state);
        return it->second;
    };
    intern(dfa.start());

    std::vector<std::vector<StateId>> preds;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const StateId bs = order[i];
        std::vector<std::pair<TokenId, StateId>> edges;
        if (bs != kTerminal) {
            for (const auto& [a, t] : token_walks(dfa, v, bs)) edges.emplace_back(a, intern(t));
            if (options.eos_terminal && dfa.accepting(bs)) {
                edges.emplace_back(v.eos(), intern(kTerminal));
                std::sort(edges.begin(), edges.end());
            }
            p.accepting.push_back(!options.eos_terminal && dfa.accepting(bs));
            p.tags.push_back(dfa.tag(bs));
        } else {
            p.accepting.push_back(1);
            p.tags.push_back(options.terminal_tag);
        }
        p.byte_state.push_back(bs);
        for (const auto& [a, t] : edges) {
            p.tokens.push_back(a);
            p.targets.push_back(t);
            if (preds.size() <= t) preds.resize(t + 1);
            preds[t].push_back(static_cast<StateId>(i));
        }
        p.offsets.push_back(static_cast<std::uint32_t>(p.tokens.size()));
    }

    // Every reachable state must be able to finish.
    const std::size_t n = order.size();
    preds.resize(n);
    std::vector<std::uint8_t> live(n, 0);
    std::deque<StateId> queue;
    for (StateId s = 0; s < n; ++s) {
        if (p.accepting[s]) {
            live[s] = 1;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        const StateId s = queue.front();
        queue.pop_front();
        for (StateId q : preds[s]) {
            if (!live[q]) {
                live[q] = 1;
                queue.push_back(q);
            }
        }
    }
    for (StateId s = 0; s < n; ++s) {
        if (!live[s]) {
            const StateId bs = order[s];
            throw InexpressibleGrammar(bs, dfa.shortest_completion(bs).value_or(""));
        }
    }

    TokenFsm fsm(std::move(p));
    fsm.set_build_millis(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    return fsm;
}

FsmStats fsm_stats(const TokenFsm& f) {
    return {f.state_count(), f.transition_count(), f.state_count() * ((f.vocab_size() + 7) / 8), f.build_millis()};
}

}  // namespace tooldec
