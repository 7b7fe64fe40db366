#include "tooldec/byte_dfa.hpp"

#include <deque>

namespace tooldec {

StateId ByteDfa::add_state(bool accepting, StateTag tag) {
    std::array<StateId, 256> row;
    row.fill(kNoState);
    rows_.push_back(row);
    accepting_.push_back(accepting ? 1 : 0);
    tags_.push_back(tag);
    return static_cast<StateId>(rows_.size() - 1);
}

std::size_t ByteDfa::transition_count() const {
    std::size_t n = 0;
    for (const auto& row : rows_) {
        for (StateId t : row) n += t != kNoState;
    }
    return n;
}

StateId ByteDfa::walk(StateId from, std::string_view bytes) const {
    StateId s = from;
    for (unsigned char b : bytes) {
        if (s == kNoState) break;
        s = rows_[s][b];
    }
    return s;
}

bool ByteDfa::accepts(std::string_view bytes) const {
    const StateId s = walk(start_, bytes);
    return s != kNoState && accepting(s);
}

void ByteDfa::prune() {
    const std::size_t n = rows_.size();
    if (start_ == kNoState || n == 0) throw GrammarError("automaton has no start state");

    std::vector<std::vector<StateId>> reverse(n);
    for (StateId s = 0; s < n; ++s) {
        for (StateId t : rows_[s]) {
            if (t != kNoState) reverse[t].push_back(s);
        }
    }
    std::vector<std::uint8_t> live(n, 0);
    std::deque<StateId> queue;
    for (StateId s = 0; s < n; ++s) {
        if (accepting_[s]) {
            live[s] = 1;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        StateId s = queue.front();
        queue.pop_front();
        for (StateId p : reverse[s]) {
            if (!live[p]) {
                live[p] = 1;
                queue.push_back(p);
            }
        }
    }
    if (!live[start_]) throw GrammarError("automaton accepts no string");

    std::vector<StateId> remap(n, kNoState);
    std::vector<StateId> order;
    remap[start_] = 0;
    order.push_back(start_);
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (StateId t : rows_[order[i]]) {
            if (t != kNoState && live[t] && remap[t] == kNoState) {
                remap[t] = static_cast<StateId>(order.size());
                order.push_back(t);
            }
        }
    }

    ByteDfa out;
    for (StateId old : order) out.add_state(accepting_[old] != 0, tags_[old]);
    for (StateId i = 0; i < order.size(); ++i) {
        for (std::size_t b = 0; b < 256; ++b) {
            const StateId t = rows_[order[i]][b];
            if (t != kNoState && remap[t] != kNoState) out.rows_[i][b] = remap[t];
        }
    }
    out.start_ = 0;
    *this = std::move(out);
}

std::optional<std::string> ByteDfa::shortest_completion(StateId s) const {
    std::vector<StateId> parent(rows_.size(), kNoState);
    std::vector<std::uint8_t> via(rows_.size(), 0);
    std::vector<std::uint8_t> seen(rows_.size(), 0);
    std::deque<StateId> queue{s};
    seen[s] = 1;
    while (!queue.empty()) {
        StateId cur = queue.front();
        queue.pop_front();
        if (accepting(cur)) {
            std::string path;
            for (StateId x = cur; x != s; x = parent[x]) path.insert(path.begin(), static_cast<char>(via[x]));
            return path;
        }
        for (std::size_t b = 0; b < 256; ++b) {
            const StateId t = rows_[cur][b];
            if (t != kNoState && !seen[t]) {
                seen[t] = 1;
                parent[t] = cur;
                via[t] = static_cast<std::uint8_t>(b);
                queue.push_back(t);
            }
        }
    }
    return std::nullopt;
}

}  // namespace tooldec
