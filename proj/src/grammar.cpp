#include "tooldec/grammar.hpp"

#include <array>

#include "grammar_nfa.hpp"

namespace tooldec {

namespace detail {

namespace {

Fragment digit(Nfa& n) { return n.byte_range('0', '9'); }

// "," plus one optional space
Fragment separator(Nfa& n) { return n.concat(n.literal(","), n.optional(n.literal(" "))); }

Fragment integer_fragment(Nfa& n) {
    const std::array<Fragment, 2> magnitude{n.literal("0"), n.concat(n.byte_range('1', '9'), n.star(digit(n)))};
    return n.concat(n.optional(n.literal("-")), n.alternation(magnitude));
}

Fragment number_fragment(Nfa& n) {
    Fragment fraction = n.concat(n.literal("."), n.plus(digit(n)));
    const auto e = n.add_state();
    const auto after_e = n.add_state();
    n.add_range(e, 'e', 'e', after_e);
    n.add_range(e, 'E', 'E', after_e);
    const auto sign = n.add_state();
    n.add_range(after_e, '+', '+', sign);
    n.add_range(after_e, '-', '-', sign);
    n.add_eps(after_e, sign);
    Fragment exponent = n.concat(Fragment{e, sign}, n.plus(digit(n)));
    const std::array<Fragment, 3> parts{integer_fragment(n), n.optional(fraction), n.optional(exponent)};
    return n.concat(parts);
}

Fragment string_fragment(Nfa& n) {
    const auto open = n.add_state();
    const auto body = n.add_state();
    const auto escape = n.add_state();
    const auto close = n.add_state();
    n.add_range(open, '"', '"', body);
    n.add_range(body, 0x20, 0x21, body);
    n.add_range(body, 0x23, 0x5b, body);
    n.add_range(body, 0x5d, 0xff, body);
    n.add_range(body, '\\', '\\', escape);
    n.add_range(escape, '"', '"', body);
    n.add_range(escape, '\\', '\\', body);
    n.add_range(body, '"', '"', close);
    return {open, close};
}

std::string quoted(std::string_view raw) {
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

Fragment enum_fragment(Nfa& n, const std::vector<std::string>& literals) {
    std::vector<Fragment> options;
    options.reserve(literals.size());
    for (const auto& l : literals) options.push_back(n.literal(quoted(l)));
    return n.alternation(options);
}

Fragment array_fragment(Nfa& n, const ParamType& element) {
    Fragment first = value_fragment(n, element);
    Fragment rest = n.star(n.concat(separator(n), value_fragment(n, element)));
    const std::array<Fragment, 3> parts{n.literal("["), n.optional(n.concat(first, rest)), n.literal("]")};
    return n.concat(parts);
}

// Members between the braces. Two tracks of junction states: `fresh[i]`
// before parameter i with nothing emitted yet, `after[i]` once something
// has been emitted (so the next member needs a separator).
Fragment members_fragment(Nfa& n, const std::vector<ParamSpec>& params) {
    const std::size_t count = params.size();
    std::size_t first_required = count;
    for (std::size_t i = 0; i < count; ++i) {
        if (params[i].required) {
            first_required = i;
            break;
        }
    }
    std::vector<std::uint32_t> fresh(count + 1), after(count + 1);
    for (std::size_t i = 0; i <= count; ++i) {
        fresh[i] = n.add_state();
        after[i] = n.add_state();
    }
    for (std::size_t i = 0; i < count; ++i) {
        const ParamSpec& p = params[i];
        // fresh[i] is unreachable past the first required parameter.
        if (i <= first_required) {
            Fragment lead = param_fragment(n, p);
            n.add_eps(fresh[i], lead.in);
            n.add_eps(lead.out, after[i + 1]);
            if (!p.required) n.add_eps(fresh[i], fresh[i + 1]);
        }
        if (i > 0) {
            Fragment follow = n.concat(separator(n), param_fragment(n, p));
            n.add_eps(after[i], follow.in);
            n.add_eps(follow.out, after[i + 1]);
            if (!p.required) n.add_eps(after[i], after[i + 1]);
        }
    }
    const auto out = n.add_state();
    n.add_eps(fresh[count], out);
    n.add_eps(after[count], out);
    return {fresh[0], out};
}

void check_type(const ParamType& t) {
    switch (t.kind) {
        case ParamType::Kind::Enum:
            if (t.literals.empty()) throw GrammarError("UnsupportedType: enum without literals");
            break;
        case ParamType::Kind::Object:
            if (t.children.empty()) throw GrammarError("UnsupportedType: object without children");
            break;
        case ParamType::Kind::Array:
            if (!t.element) throw GrammarError("UnsupportedType: array without element type");
            break;
        default: break;
    }
}

}  // namespace

Fragment value_fragment(Nfa& n, const ParamType& type) {
    check_type(type);
    switch (type.kind) {
        case ParamType::Kind::String: return string_fragment(n);
        case ParamType::Kind::Integer: return integer_fragment(n);
        case ParamType::Kind::Number: return number_fragment(n);
        case ParamType::Kind::Boolean: {
            const std::array<Fragment, 2> words{n.literal("true"), n.literal("false")};
            return n.alternation(words);
        }
        case ParamType::Kind::Enum: return enum_fragment(n, type.literals);
        case ParamType::Kind::Object: return object_fragment(n, type.children);
        case ParamType::Kind::Array: return array_fragment(n, *type.element);
    }
    throw GrammarError("UnsupportedType");
}

Fragment param_fragment(Nfa& n, const ParamSpec& param) {
    const std::array<Fragment, 3> parts{n.literal(quoted(param.name) + ":"), n.optional(n.literal(" ")),
                                        value_fragment(n, param.type)};
    return n.concat(parts);
}

Fragment object_fragment(Nfa& n, const std::vector<ParamSpec>& params) {
    const std::array<Fragment, 3> parts{n.literal("{"), members_fragment(n, params), n.literal("}")};
    return n.concat(parts);
}

Fragment positional_fragment(Nfa& n, const std::vector<ParamSpec>& params) {
    const std::size_t count = params.size();
    if (count == 0) return n.empty();
    std::size_t min_count = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (params[i].required) min_count = i + 1;
    }
    // Built from the back: tail(i) = [sep value_i tail(i+1)], optional once i >= min_count.
    Fragment tail = n.empty();
    for (std::size_t i = count; i-- > 1;) {
        Fragment step = n.concat(n.concat(separator(n), value_fragment(n, params[i].type)), tail);
        tail = i >= min_count ? n.optional(step) : step;
    }
    Fragment whole = n.concat(value_fragment(n, params[0].type), tail);
    return min_count == 0 ? n.optional(whole) : whole;
}

}  // namespace detail

namespace {

template <class Build>
ByteDfa finish(Build&& build) {
    detail::Nfa nfa;
    detail::Fragment f = build(nfa);
    ByteDfa dfa = nfa.determinize(f);
    dfa.prune();
    return dfa;
}

}  // namespace

ByteDfa build_value_dfa(const ParamType& type) {
    return finish([&](detail::Nfa& n) { return detail::value_fragment(n, type); });
}

ByteDfa build_param_machine(const ParamSpec& param) {
    return finish([&](detail::Nfa& n) { return detail::param_fragment(n, param); });
}

ByteDfa build_tool_call_dfa(const ToolSchema& schema) {
    return finish([&](detail::Nfa& n) { return detail::object_fragment(n, schema.params); });
}

ByteDfa build_positional_call_dfa(const ToolSchema& schema) {
    return finish([&](detail::Nfa& n) { return detail::positional_fragment(n, schema.params); });
}

}  // namespace tooldec
