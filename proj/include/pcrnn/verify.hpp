#pragma once

#include <cstdint>

#include "pcrnn/data.hpp"
#include "pcrnn/gradcheck.hpp"

namespace pcrnn {

// Canonical hand-built example for the micro configuration (vocab 3,
// six events, short aux chains). Chains need at least three events apiece or
// the first-gap-is-zero rule starves some recurrent weights of gradient.
TrainingExample micro_example(bool empty_assignee = false, bool empty_inventor = false);

// End-to-end finite-difference check of the full model at 64 bits on the
// micro configuration, teacher-forced over two examples chosen so every
// parameter tensor (null vectors included) touches the objective.
GradCheckResult micro_gradcheck(std::uint64_t seed = 61, double eps = 1e-5);

}  // namespace pcrnn
