#pragma once

#include <vector>

#include "ordalloc/core.hpp"

namespace ordalloc {

/// A lottery over deterministic allocations.
struct Decomposition {
  struct Term {
    Rat weight;
    /// assignment[i] is the object agent i receives in this permutation.
    std::vector<ObjectIndex> assignment;
  };
  std::vector<Term> terms;
};

/// Birkhoff-von Neumann decomposition: repeatedly extracts a perfect matching
/// of the positive entries (augmenting paths, lowest object index first) and
/// subtracts its smallest matched entry.
Decomposition decompose(const Allocation& allocation);

/// Exact weighted sum of the terms. Throws InvalidOrderLottery if weights are
/// not positive or do not sum to one.
Allocation recompose(const Decomposition& decomposition);

}  // namespace ordalloc
