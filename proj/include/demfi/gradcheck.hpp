#pragma once

#include <cstdint>

#include "demfi/tensor.hpp"

namespace demfi {

// Central finite-difference comparisons at 64-bit precision, step 1e-3.
// `max_rel_error` is the largest elementwise deviation normalized by the
// largest finite-difference gradient magnitude of the instance.
struct GradCheckResult {
    double max_rel_error = 0.0;
    double max_blocked_flow_grad = 0.0;  // must be exactly zero where blocking applies
};

GradCheckResult gradcheck_warp(std::uint64_t seed);
GradCheckResult gradcheck_fac(std::uint64_t seed);
GradCheckResult gradcheck_fwb(std::uint64_t seed);

}  // namespace demfi
