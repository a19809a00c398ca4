#pragma once

#include "rlt/env.hpp"

namespace rlt {

// One long position at the first decidable bar, held to the end.
Rollout buy_and_hold(const FeatureFrame& frame, std::size_t begin, std::size_t end,
                     const EnvConfig& cfg);

// Perfect-foresight annual strategy: each calendar year is traded in the
// direction of that year's close-to-close return. A flat year keeps the
// previous position; a new trade opens only when the sign flips.
Rollout perfect_annual(const FeatureFrame& frame, std::size_t begin, std::size_t end,
                       const EnvConfig& cfg);

}  // namespace rlt
