#pragma once

#include "hypvar/test_functions.hpp"
#include "hypvar/variance.hpp"

namespace hypvar::reference {

/// phi by summing every ordered mark pair. O(M^2); for cross-checks only.
VarianceDecomposition phi_brute_force(const MarkSet& marks, const WeightFunction& wf, double T);

} // namespace hypvar::reference
