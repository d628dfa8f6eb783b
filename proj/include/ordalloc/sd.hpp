#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "ordalloc/core.hpp"

namespace ordalloc {

/// Outcome of comparing x against y by first-order stochastic dominance.
enum class SdComparison { Dominates, DominatedBy, Equal, Incomparable };

std::string_view to_string(SdComparison c);

/// Entry k is the mass x puts on the k+1 best objects under pref; the last
/// entry is the total mass.
std::vector<Rat> cumulative_prefix(std::span<const Rat> lottery, const Preference& pref);

SdComparison compare_sd(std::span<const Rat> x, std::span<const Rat> y, const Preference& pref);

/// x R^sd y: x dominates y or equals it.
inline bool weakly_dominates(std::span<const Rat> x, std::span<const Rat> y, const Preference& pref) {
  const auto c = compare_sd(x, y, pref);
  return c == SdComparison::Dominates || c == SdComparison::Equal;
}

}  // namespace ordalloc
