#pragma once

#include <functional>
#include <vector>

#include "leap/ad/tape.hpp"

namespace leap::ad {

// Central-difference check of the tape gradient. `build` must construct a
// fresh tape computation and return the scalar output; it is invoked many
// times, so it has to be deterministic (dropout off or identically seeded).
// Returns max over all parameter coordinates of
//   |g_ad - g_fd| / max(1, |g_ad|, |g_fd|).
double grad_check(const std::function<Val(Tape&)>& build,
                  const std::vector<Parameter*>& params, double step = 1e-5);

}  // namespace leap::ad
