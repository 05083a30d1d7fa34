#pragma once

#include "dcopf/algorithm.hpp"
#include "dcopf/costs.hpp"
#include "dcopf/network.hpp"
#include "dcopf/trace.hpp"

namespace dcopf {

// Straight-line serial re-implementation of the round recursion, written
// against dense matrices with no shared engine code: builds its own
// susceptance and Metropolis matrices and evaluates its own step sizes.
// Used as the equivalence oracle for the CSR/OpenMP engine and as the
// baseline in the engine benchmark.
RunTrace reference_simulate(const Network& net, const StepSchedule& sched,
                            const CostStreamConfig& stream, GradVariant variant,
                            int horizon);

}  // namespace dcopf
