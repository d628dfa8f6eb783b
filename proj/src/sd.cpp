#include "ordalloc/sd.hpp"

#include <algorithm>

namespace ordalloc {

std::string_view to_string(SdComparison c) {
  switch (c) {
    case SdComparison::Dominates: return "Dominates";
    case SdComparison::DominatedBy: return "DominatedBy";
    case SdComparison::Equal: return "Equal";
    case SdComparison::Incomparable: return "Incomparable";
  }
  return "?";
}

std::vector<Rat> cumulative_prefix(std::span<const Rat> lottery, const Preference& pref) {
  if (lottery.size() != pref.size()) throw Error(Errc::DimensionMismatch, "lottery and preference sizes differ");
  std::vector<Rat> prefix(pref.size());
  Rat running = 0;
  for (std::size_t k = 0; k < pref.size(); ++k) {
    running += lottery[pref.object_at(k)];
    prefix[k] = running;
  }
  return prefix;
}

SdComparison compare_sd(std::span<const Rat> x, std::span<const Rat> y, const Preference& pref) {
  if (x.size() != y.size()) throw Error(Errc::DimensionMismatch, "lotteries of different sizes");
  if (std::equal(x.begin(), x.end(), y.begin())) return SdComparison::Equal;
  bool x_ahead = false;
  bool y_ahead = false;
  Rat px = 0;
  Rat py = 0;
  for (std::size_t k = 0; k < pref.size(); ++k) {
    const auto a = pref.object_at(k);
    px += x[a];
    py += y[a];
    const int c = cmp(px, py);
    x_ahead |= c > 0;
    y_ahead |= c < 0;
  }
  if (x_ahead && y_ahead) return SdComparison::Incomparable;
  if (x_ahead) return SdComparison::Dominates;
  if (y_ahead) return SdComparison::DominatedBy;
  // distinct lotteries with identical prefixes cannot happen under a strict order
  return SdComparison::Equal;
}

}  // namespace ordalloc
