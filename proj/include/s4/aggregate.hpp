#pragma once

#include <cstdint>
#include <vector>

#include "s4/bigint.hpp"

namespace s4 {

// What the CSP ships back for a summation request: the column-wise mod-p sums
// SUM_1..SUM_{k-1} of the selected split rows and the number of rows summed.
struct AggregateResponse {
  std::vector<BigUint> sums;
  std::uint64_t count = 0;
};

}  // namespace s4
