#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include "ordalloc/core.hpp"

namespace ordalloc {

/// Zero-sum perturbation of an allocation, one row per agent. Rows and
/// columns sum to zero and entries are nonnegative wherever the allocation
/// it certifies against is zero.
using ShiftProfile = RatMatrix;

/// Per-agent witness: std::nullopt means the agent's lottery is unchanged,
/// otherwise the number k (1 <= k < |A|) of top objects whose cumulative
/// probability strictly increases under the shift.
using Witness = std::optional<std::size_t>;

struct InefficiencyCertificate {
  ShiftProfile shift;
  std::vector<Witness> witnesses;
};

/// Throws InvalidCertificate describing the first broken invariant.
void validate_certificate(const InefficiencyCertificate& cert, const Allocation& allocation, const Profile& profile);

struct AmbiguousVerdict {
  bool efficient = true;
  /// When not efficient: a distinct allocation weakly SD-preferred by every agent.
  std::optional<Allocation> dominating;
  ShiftProfile shift;
};

/// sd-efficiency: decided by one LP over shifts whose every prefix gain is
/// nonnegative, maximizing the total prefix gain.
AmbiguousVerdict is_ambiguously_efficient(const Allocation& allocation, const Profile& profile);

struct UnambiguousVerdict {
  bool efficient = true;
  std::optional<InefficiencyCertificate> certificate;
  /// Number of witness systems handed to the LP solver.
  std::uint64_t systems_solved = 0;
};

enum class WitnessSearch {
  /// Depth-first over agents with infeasible partial systems pruned and
  /// witness depths restricted to those below some support object.
  Pruned,
  /// Every combination of Unchanged / depth 1..|A|-1, one LP each.
  Exhaustive,
};

/// Unambiguous efficiency: no other allocation leaves every agent either
/// unchanged or not SD-worse. Depends on the allocation only through its
/// support pattern.
UnambiguousVerdict is_unambiguously_efficient(const Allocation& allocation, const Profile& profile,
                                              WitnessSearch search = WitnessSearch::Pruned);

/// Memoizing front end for sweeps: verdicts are keyed by (support, profile).
/// Safe for concurrent use.
class UnambiguousChecker {
 public:
  UnambiguousVerdict check(const Allocation& allocation, const Profile& profile);
  std::size_t cache_size() const;
  std::uint64_t hits() const;

 private:
  using Key = std::pair<std::vector<bool>, std::vector<std::vector<ObjectIndex>>>;
  mutable std::mutex mutex_;
  std::map<Key, UnambiguousVerdict> cache_;
  std::uint64_t hits_ = 0;
};

/// Pairs (i, j), i < j, whose supports share three or more objects.
std::vector<std::pair<AgentIndex, AgentIndex>> check_support_bound(const Allocation& allocation);

struct GapViolation {
  AgentIndex i;
  AgentIndex j;
  ObjectIndex a;
  ObjectIndex b;
  ObjectIndex c;
  friend bool operator==(const GapViolation&, const GapViolation&) = default;
};

/// Tuples with a > b > c for both i and j, j holding some b while i holds
/// both a and c.
std::vector<GapViolation> check_no_gaps(const Allocation& allocation, const Profile& profile);

struct ProbeResult {
  bool base_efficient = false;
  bool passed = false;
  std::size_t trials_run = 0;
  std::optional<Allocation> counterexample;
};

/// Re-weights the Birkhoff-von Neumann terms of the allocation at random
/// (some weights may vanish, shrinking supports) and re-checks every
/// resulting allocation from scratch.
ProbeResult support_invariance_probe(const Allocation& allocation, const Profile& profile, std::size_t trials,
                                     std::uint64_t seed);

/// Expected-utility vector, one value per object.
using VnmUtility = std::vector<Rat>;

bool is_consistent(const VnmUtility& utility, const Preference& pref);

struct FalsifyingUtilities {
  std::vector<VnmUtility> utilities;
  /// Step length t with allocation + t * shift still an allocation.
  Rat scale;
  Allocation improved;
};

/// Builds a consistent vNM profile under which allocation + t * shift is a
/// Pareto improvement: for a shifted agent, with a1 the best object whose
/// prefix gain is positive and b1 just below it, u(a1) = 1, u(b1) = eps,
/// objects above a1 within eps of 1 and objects below b1 within (0, eps),
/// eps = (m' - m) / 2. Throws InvalidCertificate.
FalsifyingUtilities falsifying_utilities(const InefficiencyCertificate& cert, const Allocation& allocation,
                                         const Profile& profile);

struct ParetoVerdict {
  bool efficient = true;
  std::optional<Allocation> improvement;
};

/// Pareto efficiency for a fixed vNM profile, by LP over the Birkhoff polytope.
ParetoVerdict is_pareto_efficient_at(const Allocation& allocation, const std::vector<VnmUtility>& utilities);

/// Sorted distinct draws from the grid {1..10^6}/10^6, assigned best-first.
VnmUtility sample_consistent_vnm(const Preference& pref, std::mt19937_64& rng);

}  // namespace ordalloc
