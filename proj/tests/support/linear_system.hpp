#pragma once

// Three-variable linear lagged process with a closed-form recurrence:
//   A[t] = 0.1 + 0.5 A[t-1]
//   B[t] = 0.3 A[t-1] - 0.2 B[t-2]
//   C[t] = 0.7 B[t] + 0.25 C[t-1] - 0.05 C[t-2] + 0.4 A[t-3]
// C's parents form one group bound to a single two-slot window functional.

#include <array>
#include <vector>

#include "karmats/graph.hpp"

namespace oracle {

struct LinearSystem {
  karmats::DscpGraph graph;
  /// Initial values used for the history prefix (the declared offsets).
  std::array<double, 3> offsets{};
};

LinearSystem three_variable_system();

/// Unrolls the recurrence above for `steps` steps. `history[v]` holds the
/// values before step 0, oldest first; missing entries take the offset.
std::array<std::vector<double>, 3> unroll(const LinearSystem& sys, std::size_t steps,
                                          const std::array<std::vector<double>, 3>& history = {});

}  // namespace oracle
