#pragma once

// Enumeration of combinatorial types: labeled tree topologies on a fixed
// end set, built by leaf insertion so every topology appears exactly once.
// excess = sum over vertices of (valence - 3); trivalent trees have excess
// zero, each cross-ratio in degenerate mode buys one extra unit.

#include "crfd/tree.hpp"

#include <cstdint>
#include <functional>

namespace crfd {

// Calls fn for every labeled topology with n_ends ends (indices 0..n-1 as
// end labels; relabel afterwards) and the exact requested excess. Returns
// false if fn ever returns false (early stop).
bool for_each_topology(int n_ends, int excess, const std::function<bool(const TreeTopology&)>& fn);

// (2n-5)!! trivalent topologies on n ends.
std::uint64_t count_trivalent(int n_ends);

}  // namespace crfd
