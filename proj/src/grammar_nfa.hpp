#pragma once

#include <vector>

#include "nfa.hpp"
#include "tooldec/schema.hpp"

namespace tooldec::detail {

Fragment value_fragment(Nfa& nfa, const ParamType& type);
Fragment param_fragment(Nfa& nfa, const ParamSpec& param);
Fragment object_fragment(Nfa& nfa, const std::vector<ParamSpec>& params);
Fragment positional_fragment(Nfa& nfa, const std::vector<ParamSpec>& params);

}  // namespace tooldec::detail
