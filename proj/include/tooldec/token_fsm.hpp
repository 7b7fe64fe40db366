#pragma once

// Token-level automaton lifted from a ByteDfa by walking every token's byte
// expansion, with one precomputed bitset mask per state.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tooldec/byte_dfa.hpp"
#include "tooldec/vocab.hpp"

namespace tooldec {

class InexpressibleGrammar : public std::runtime_error {
public:
    InexpressibleGrammar(StateId byte_state, std::string sample_required_bytes);

    StateId byte_state() const noexcept { return byte_state_; }
    // Shortest byte string the vocabulary would have to spell from there.
    const std::string& sample_required_bytes() const noexcept { return sample_; }

private:
    StateId byte_state_;
    std::string sample_;
};

class TokenMask {
public:
    TokenMask(std::span<const std::uint64_t> words, std::size_t bits) : words_(words), bits_(bits) {}

    bool test(TokenId a) const { return a < bits_ && ((words_[a >> 6] >> (a & 63)) & 1u); }
    std::size_t size() const noexcept { return bits_; }
    std::size_t count() const;
    bool all() const { return count() == bits_; }
    std::span<const std::uint64_t> words() const noexcept { return words_; }

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                const int b = __builtin_ctzll(bits);
                f(static_cast<TokenId>(w * 64 + b));
                bits &= bits - 1;
            }
        }
    }

private:
    std::span<const std::uint64_t> words_;
    std::size_t bits_;
};

struct FsmStats {
    std::size_t state_count = 0;
    std::size_t transition_count = 0;
    std::size_t mask_bytes = 0;
    double build_millis = 0.0;
};

class TokenFsm {
public:
    // Flat representation, also what the artifact format stores.
    // Transitions of state s live in [offsets[s], offsets[s+1]), sorted by token.
    struct Parts {
        std::size_t vocab_size = 0;
        TokenId eos = 0;
        StateId start = 0;
        std::vector<std::uint8_t> accepting;
        std::vector<StateTag> tags;
        std::vector<StateId> byte_state;  // kNoState for the post-EOS terminal
        std::vector<std::uint32_t> offsets;
        std::vector<TokenId> tokens;
        std::vector<StateId> targets;
    };

    // Validates structure and derives masks. Throws std::invalid_argument.
    explicit TokenFsm(Parts parts);

    std::size_t state_count() const noexcept { return p_.accepting.size(); }
    std::size_t vocab_size() const noexcept { return p_.vocab_size; }
    std::size_t transition_count() const noexcept { return p_.tokens.size(); }
    TokenId eos() const noexcept { return p_.eos; }
    StateId start() const noexcept { return p_.start; }
    bool accepting(StateId s) const { return p_.accepting[s] != 0; }
    const StateTag& tag(StateId s) const { return p_.tags[s]; }
    StateId byte_state(StateId s) const { return p_.byte_state[s]; }

    // kNoState when `a` is not permitted in `s`.
    StateId next(StateId s, TokenId a) const;
    TokenMask mask(StateId s) const {
        return {{masks_.data() + s * words_per_state_, words_per_state_}, p_.vocab_size};
    }
    std::span<const TokenId> tokens(StateId s) const {
        return {p_.tokens.data() + p_.offsets[s], p_.offsets[s + 1] - p_.offsets[s]};
    }
    std::span<const StateId> targets(StateId s) const {
        return {p_.targets.data() + p_.offsets[s], p_.offsets[s + 1] - p_.offsets[s]};
    }

    // Inside a free-text segment (tag carries anchor progress).
    bool is_free_text(StateId s) const { return p_.tags[s].anchor_progress >= 0; }
    // Free-text states whose mask is all-ones.
    std::vector<StateId> free_text_states() const;

    // Walk fully defined and ends in an accepting state.
    bool accepts(std::span<const TokenId> tokens) const;

    const Parts& parts() const noexcept { return p_; }
    double build_millis() const noexcept { return build_millis_; }
    void set_build_millis(double ms) noexcept { build_millis_ = ms; }

private:
    Parts p_;
    std::size_t words_per_state_ = 0;
    std::vector<std::uint64_t> masks_;
    double build_millis_ = 0.0;
};

struct CompileOptions {
    // Accepting byte states get an EOS transition into a single terminal
    // state; only that state is accepting. Otherwise accepting byte states
    // are accepting directly and EOS is never permitted.
    bool eos_terminal = true;
    StateTag terminal_tag{};
};

// Every (token, landing state) for which the token's full expansion walks
// from `s` without falling off the automaton, sorted by token.
std::vector<std::pair<TokenId, StateId>> token_walks(const ByteDfa& dfa, const Vocabulary& v, StateId s);

// Per-state mask straight from the byte DFA, for callers that do not need a
// compiled machine.
std::vector<std::uint64_t> compute_token_mask(const ByteDfa& dfa, const Vocabulary& v, StateId s);

// Throws InexpressibleGrammar if a reachable state cannot reach acceptance
// through tokens (in particular, a non-accepting state with an empty mask).
TokenFsm compile_token_fsm(const ByteDfa& dfa, const Vocabulary& v, const CompileOptions& options = {});

FsmStats fsm_stats(const TokenFsm& f);

}  // namespace tooldec
