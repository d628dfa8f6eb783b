#pragma once

#include <vector>

#include "ordalloc/core.hpp"

namespace ordalloc {

/// Rate mu at which an agent ranking a_1 > ... > a_n (1-based names) is
/// indifferent between 1/n of a_2 and a mix of a_1 with weight mu and a_k
/// with weight 1 - mu, under the utility 1, (n-2)e, (n-3)e, ..., 0.
/// Throws DegenerateDenominator when 1 - (n - k) e is not positive.
Rat exchange_rate(std::size_t k, std::size_t n, const Rat& epsilon);

/// Utility of agent 1 (index 0) in the trade construction: a_1 -> 1,
/// a_2 -> 1 - e, a_l -> (n - l) e for l >= 3.
std::vector<Rat> trader_utility(std::size_t n, const Rat& epsilon);

/// Utility of every other agent: a_1 -> 1, a_l -> (n - l) e for l >= 2.
std::vector<Rat> partner_utility(std::size_t n, const Rat& epsilon);

struct SymmetryCostReport {
  std::size_t n = 0;
  Rat epsilon;
  /// rates[k - 3] for k = 3..n.
  std::vector<Rat> rates;
  /// Uniform allocation with agent 1 trading 1/n of each partner k's a_2
  /// against mu^k / n of a_1 and (1 - mu^k) / n of a_k.
  Allocation traded;
  Lottery trader_lottery;
  Rat gain;
  /// Largest of u_1(uniform) - 2/n and 1 - u_1(traded lottery).
  Rat delta;
  /// (n - 2)/n - 2 delta.
  Rat bound;
  Rat limit;
};

/// Objects are ranked identically by everyone, index order. Throws
/// InadmissibleEpsilon unless every rate lies in (0, 1), the rates sum to at
/// most one and agent 1 gains per unit of every trade. n >= 3.
SymmetryCostReport symmetry_cost(std::size_t n, const Rat& epsilon);

}  // namespace ordalloc
