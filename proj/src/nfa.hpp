#pragma once

// Thompson-style NFA with byte-range edges, used only to assemble grammars
// before subset construction into a ByteDfa.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tooldec/byte_dfa.hpp"

namespace tooldec::detail {

struct Fragment {
    std::uint32_t in;
    std::uint32_t out;
};

class Nfa {
public:
    struct Range {
        std::uint8_t lo;
        std::uint8_t hi;
        std::uint32_t to;
    };

    // New states inherit the current tag.
    void set_tag(StateTag tag) { tag_ = tag; }
    const StateTag& current_tag() const { return tag_; }

    std::uint32_t add_state();
    void add_range(std::uint32_t from, std::uint8_t lo, std::uint8_t hi, std::uint32_t to);
    void add_eps(std::uint32_t from, std::uint32_t to) { eps_[from].push_back(to); }

    Fragment empty();
    Fragment literal(std::string_view bytes);
    Fragment byte_range(std::uint8_t lo, std::uint8_t hi);
    Fragment concat(Fragment a, Fragment b);
    Fragment concat(std::span<const Fragment> parts);
    Fragment alternation(std::span<const Fragment> options);
    Fragment optional(Fragment f);
    Fragment star(Fragment f);
    Fragment plus(Fragment f);

    // Subset construction; accepting iff the set contains `f.out`. Tags merge
    // as: max segment, tool if all tagged members agree, max anchor progress.
    ByteDfa determinize(Fragment f) const;

private:
    void closure(std::vector<std::uint32_t>& set) const;

    std::vector<std::vector<Range>> ranges_;
    std::vector<std::vector<std::uint32_t>> eps_;
    std::vector<StateTag> tags_;
    StateTag tag_;
};

}  // namespace tooldec::detail
