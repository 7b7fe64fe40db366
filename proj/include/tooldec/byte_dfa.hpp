#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tooldec {

using StateId = std::uint32_t;
inline constexpr StateId kNoState = 0xffffffffu;

// Where a state sits inside a scaffolded session. -1 means "not applicable"
// (or, for `tool`, "not yet decided").
struct StateTag {
    std::int32_t segment = -1;
    std::int32_t tool = -1;
    std::int32_t anchor_progress = -1;  // bytes of a free-text anchor matched so far

    friend bool operator==(const StateTag&, const StateTag&) = default;
};

class GrammarError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Deterministic automaton over bytes with dense transition rows.
class ByteDfa {
public:
    StateId add_state(bool accepting, StateTag tag = {});
    void set_transition(StateId from, std::uint8_t byte, StateId to) { rows_[from][byte] = to; }
    void set_start(StateId s) { start_ = s; }

    StateId start() const noexcept { return start_; }
    std::size_t size() const noexcept { return rows_.size(); }
    StateId next(StateId s, std::uint8_t byte) const { return rows_[s][byte]; }
    bool accepting(StateId s) const { return accepting_[s] != 0; }
    const StateTag& tag(StateId s) const { return tags_[s]; }
    std::size_t transition_count() const;

    // kNoState as soon as a byte has no transition.
    StateId walk(StateId from, std::string_view bytes) const;
    bool accepts(std::string_view bytes) const;

    // Keeps only states that are reachable from start and can reach an
    // accepting state, renumbered in breadth-first order (bytes ascending).
    // Throws GrammarError if the language is empty.
    void prune();

    // Shortest byte string taking `s` to acceptance (lexicographically least
    // among the shortest); nullopt if none exists.
    std::optional<std::string> shortest_completion(StateId s) const;

private:
    std::vector<std::array<StateId, 256>> rows_;
    std::vector<std::uint8_t> accepting_;
    std::vector<StateTag> tags_;
    StateId start_ = kNoState;
};

}  // namespace tooldec
