#include "ordalloc/bvn.hpp"

#include <functional>
#include <limits>

namespace ordalloc {

namespace {

constexpr std::size_t kUnmatched = std::numeric_limits<std::size_t>::max();

/// Kuhn's algorithm on the bipartite graph of positive entries.
std::vector<ObjectIndex> perfect_matching(const RatMatrix& m) {
  const std::size_t n = m.rows();
  std::vector<std::size_t> owner(n, kUnmatched);  // object -> agent
  std::vector<bool> visited(n);
  std::function<bool(std::size_t)> augment = [&](std::size_t agent) {
    for (std::size_t a = 0; a < n; ++a) {
      if (sgn(m(agent, a)) <= 0 || visited[a]) continue;
      visited[a] = true;
      if (owner[a] == kUnmatched || augment(owner[a])) {
        owner[a] = agent;
        return true;
      }
    }
    return false;
  };
  for (std::size_t agent = 0; agent < n; ++agent) {
    std::fill(visited.begin(), visited.end(), false);
    // Birkhoff guarantees success for any nonnegative matrix with equal positive line sums.
    if (!augment(agent)) throw Error(Errc::ColumnSumViolation, "support admits no perfect matching");
  }
  std::vector<ObjectIndex> assignment(n);
  for (std::size_t a = 0; a < n; ++a) assignment[owner[a]] = a;
  return assignment;
}

}  // namespace

Decomposition decompose(const Allocation& allocation) {
  RatMatrix remaining = allocation.matrix();
  const std::size_t n = allocation.size();
  Decomposition out;
  Rat mass = 1;
  while (sgn(mass) > 0) {
    auto assignment = perfect_matching(remaining);
    Rat weight = remaining(0, assignment[0]);
    for (std::size_t i = 1; i < n; ++i) weight = std::min(weight, remaining(i, assignment[i]));
    for (std::size_t i = 0; i < n; ++i) remaining(i, assignment[i]) -= weight;
    mass -= weight;
    out.terms.push_back({std::move(weight), std::move(assignment)});
  }
  return out;
}

Allocation recompose(const Decomposition& decomposition) {
  if (decomposition.terms.empty()) throw Error(Errc::InvalidOrderLottery, "empty decomposition");
  const std::size_t n = decomposition.terms.front().assignment.size();
  RatMatrix m(n, n);
  Rat total = 0;
  for (const auto& term : decomposition.terms) {
    if (sgn(term.weight) <= 0) throw Error(Errc::InvalidOrderLottery, "non-positive weight " + to_string(term.weight));
    check_permutation(term.assignment, n);
    for (std::size_t i = 0; i < n; ++i) m(i, term.assignment[i]) += term.weight;
    total += term.weight;
  }
  if (total != 1) throw Error(Errc::InvalidOrderLottery, "weights sum to " + to_string(total));
  return validate_allocation(std::move(m));
}

}  // namespace ordalloc
