#include "nfa.hpp"

#include <algorithm>
#include <array>
#include <map>

namespace tooldec::detail {

std::uint32_t Nfa::add_state() {
    ranges_.emplace_back();
    eps_.emplace_back();
    tags_.push_back(tag_);
    return static_cast<std::uint32_t>(ranges_.size() - 1);
}

void Nfa::add_range(std::uint32_t from, std::uint8_t lo, std::uint8_t hi, std::uint32_t to) {
    ranges_[from].push_back({lo, hi, to});
}

Fragment Nfa::empty() {
    const auto s = add_state();
    return {s, s};
}

Fragment Nfa::literal(std::string_view bytes) {
    const auto in = add_state();
    auto cur = in;
    for (unsigned char b : bytes) {
        const auto next = add_state();
        add_range(cur, b, b, next);
        cur = next;
    }
    return {in, cur};
}

Fragment Nfa::byte_range(std::uint8_t lo, std::uint8_t hi) {
    const auto in = add_state();
    const auto out = add_state();
    add_range(in, lo, hi, out);
    return {in, out};
}

Fragment Nfa::concat(Fragment a, Fragment b) {
    add_eps(a.out, b.in);
    return {a.in, b.out};
}

Fragment Nfa::concat(std::span<const Fragment> parts) {
    if (parts.empty()) return empty();
    Fragment f = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) f = concat(f, parts[i]);
    return f;
}

Fragment Nfa::alternation(std::span<const Fragment> options) {
    const auto in = add_state();
    const auto out = add_state();
    for (const Fragment& o : options) {
        add_eps(in, o.in);
        add_eps(o.out, out);
    }
    return {in, out};
}

Fragment Nfa::optional(Fragment f) {
    const auto in = add_state();
    const auto out = add_state();
    add_eps(in, f.in);
    add_eps(f.out, out);
    add_eps(in, out);
    return {in, out};
}

Fragment Nfa::star(Fragment f) {
    const auto hub = add_state();
    add_eps(hub, f.in);
    add_eps(f.out, hub);
    return {hub, hub};
}

Fragment Nfa::plus(Fragment f) {
    const auto out = add_state();
    add_eps(f.out, f.in);
    add_eps(f.out, out);
    return {f.in, out};
}

void Nfa::closure(std::vector<std::uint32_t>& set) const {
    std::vector<std::uint32_t> stack(set.begin(), set.end());
    // Closures are small; a sorted vector is enough.
    std::vector<std::uint32_t> seen;
    auto visit = [&](std::uint32_t s) {
        auto it = std::lower_bound(seen.begin(), seen.end(), s);
        if (it != seen.end() && *it == s) return false;
        seen.insert(it, s);
        return true;
    };
    for (auto s : set) visit(s);
    while (!stack.empty()) {
        const auto s = stack.back();
        stack.pop_back();
        for (auto t : eps_[s]) {
            if (visit(t)) stack.push_back(t);
        }
    }
    set = std::move(seen);
}

ByteDfa Nfa::determinize(Fragment f) const {
    ByteDfa dfa;
    std::map<std::vector<std::uint32_t>, StateId> by_closure;
    std::vector<std::vector<std::uint32_t>> sets;

    auto merged_tag = [&](const std::vector<std::uint32_t>& set) {
        StateTag t;
        bool tool_conflict = false;
        for (auto s : set) {
            const StateTag& st = tags_[s];
            t.segment = std::max(t.segment, st.segment);
            t.anchor_progress = std::max(t.anchor_progress, st.anchor_progress);
            if (st.tool >= 0) {
                if (t.tool >= 0 && t.tool != st.tool) tool_conflict = true;
                t.tool = st.tool;
            }
        }
        if (tool_conflict) t.tool = -1;
        return t;
    };
    auto intern = [&](std::vector<std::uint32_t> set) {
        auto it = by_closure.find(set);
        if (it != by_closure.end()) return it->second;
        const bool acc = std::binary_search(set.begin(), set.end(), f.out);
        const StateId id = dfa.add_state(acc, merged_tag(set));
        by_closure.emplace(set, id);
        sets.push_back(std::move(set));
        return id;
    };

    std::vector<std::uint32_t> start{f.in};
    closure(start);
    dfa.set_start(intern(std::move(start)));

    std::array<std::vector<std::uint32_t>, 256> moves;
    std::map<std::vector<std::uint32_t>, StateId> by_move;
    for (StateId cur = 0; cur < sets.size(); ++cur) {
        for (auto& m : moves) m.clear();
        for (auto s : sets[cur]) {
            for (const Range& r : ranges_[s]) {
                for (unsigned b = r.lo; b <= r.hi; ++b) moves[b].push_back(r.to);
            }
        }
        by_move.clear();
        for (std::size_t b = 0; b < 256; ++b) {
            auto& m = moves[b];
            if (m.empty()) continue;
            std::sort(m.begin(), m.end());
            m.erase(std::unique(m.begin(), m.end()), m.end());
            auto hit = by_move.find(m);
            StateId target;
            if (hit != by_move.end()) {
                target = hit->second;
            } else {
                std::vector<std::uint32_t> c = m;
                closure(c);
                target = intern(std::move(c));
                by_move.emplace(m, target);
            }
            dfa.set_transition(cur, static_cast<std::uint8_t>(b), target);
        }
    }
    return dfa;
}

}  // namespace tooldec::detail
