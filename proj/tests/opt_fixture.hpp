#pragma once

#include "instance_context.hpp"

namespace heliopack::testing {

using oracle::round_to_float;
using Problem = oracle::InstanceContext;

inline std::vector<int> as_ints(const Selection& x) { return {x.begin(), x.end()}; }

}  // namespace heliopack::testing
