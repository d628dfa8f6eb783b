#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "ordalloc/bvn.hpp"
#include "ordalloc/efficiency.hpp"
#include "ordalloc/sd.hpp"
#include "support.hpp"

using namespace ordalloc;
using namespace testing;

namespace {

// Independent oracle for sd-efficiency: the allocation is sd-efficient iff
// the relation "some agent prefers a to b while holding some b" is acyclic.
bool acyclicity_oracle(const Allocation& pi, const Profile& p) {
  const std::size_t n = pi.size();
  std::vector<std::vector<bool>> edge(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (sgn(pi(i, b)) > 0 && p[i].prefers(a, b)) edge[a][b] = true;
      }
    }
  }
  // transitive closure
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (edge[a][k] && edge[k][b]) edge[a][b] = true;
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (edge[a][a]) return false;
  }
  return true;
}

// Deterministic allocations: brute force over all permutations for a weak
// Pareto improvement with at least one agent strictly better.
bool deterministic_pareto(const std::vector<ObjectIndex>& assignment, const Profile& p) {
  const std::size_t n = assignment.size();
  std::vector<ObjectIndex> other(n);
  std::iota(other.begin(), other.end(), 0);
  do {
    bool weak = true;
    bool strict = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (p[i].prefers(assignment[i], other[i])) weak = false;
      if (p[i].prefers(other[i], assignment[i])) strict = true;
    }
    if (weak && strict) return false;
  } while (std::next_permutation(other.begin(), other.end()));
  return true;
}

Allocation random_mixture(std::size_t n, std::size_t terms, std::mt19937_64& rng) {
  RatMatrix m(n, n);
  std::vector<long> weights;
  std::vector<std::vector<std::size_t>> perms;
  long total = 0;
  for (std::size_t t = 0; t < terms; ++t) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    perms.push_back(perm);
    weights.push_back(1 + static_cast<long>(rng() % 5));
    total += weights.back();
  }
  for (std::size_t t = 0; t < terms; ++t) {
    for (std::size_t i = 0; i < n; ++i) m(i, perms[t][i]) += ratio(weights[t], total);
  }
  return validate_allocation(m);
}

Profile random_profile(std::size_t n, std::mt19937_64& rng) {
  std::vector<Preference> prefs;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ObjectIndex> r(n);
    std::iota(r.begin(), r.end(), 0);
    std::shuffle(r.begin(), r.end(), rng);
    prefs.emplace_back(r);
  }
  return Profile(prefs);
}

}  // namespace

TEST_CASE("incomparable trade: sd-efficient but not unambiguously efficient") {
  const auto pi = incomparable_trade_allocation();
  const auto p = identical_profile(3);
  CHECK(is_ambiguously_efficient(pi, p).efficient);
  const auto v = is_unambiguously_efficient(pi, p);
  REQUIRE_FALSE(v.efficient);
  REQUIRE(v.certificate);
  CHECK_NOTHROW(validate_certificate(*v.certificate, pi, p));
  CHECK_FALSE(check_support_bound(pi).empty());
}

TEST_CASE("uniform allocation under identical preferences") {
  const auto pi = uniform_allocation(3);
  const auto p = identical_profile(3);
  CHECK(is_ambiguously_efficient(pi, p).efficient);
  const auto v = is_unambiguously_efficient(pi, p);
  REQUIRE_FALSE(v.efficient);
  CHECK_NOTHROW(validate_certificate(*v.certificate, pi, p));
}

TEST_CASE("a swap both agents want is sd-dominated") {
  // agent 0 holds b but wants a, agent 1 holds a but wants b
  const auto pi = permutation_allocation(std::vector<ObjectIndex>{1, 0, 2});
  const auto p = profile({"abc", "bac", "cab"});
  const auto v = is_ambiguously_efficient(pi, p);
  REQUIRE_FALSE(v.efficient);
  REQUIRE(v.dominating);
  for (std::size_t i = 0; i < 3; ++i) CHECK(weakly_dominates(v.dominating->row(i), pi.row(i), p[i]));
  CHECK_FALSE(*v.dominating == pi);
  CHECK_FALSE(is_unambiguously_efficient(pi, p).efficient);
}

TEST_CASE("wide support allocation is unambiguously efficient") {
  CHECK(is_unambiguously_efficient(wide_support_allocation(), wide_support_profile()).efficient);
}

TEST_CASE("sd-efficiency LP agrees with the acyclicity oracle") {
  std::mt19937_64 rng(5);
  int inefficient = 0;
  for (std::size_t n = 3; n <= 5; ++n) {
    for (int trial = 0; trial < 60; ++trial) {
      const auto pi = random_mixture(n, 1 + rng() % 4, rng);
      const auto p = random_profile(n, rng);
      const bool oracle = acyclicity_oracle(pi, p);
      const auto v = is_ambiguously_efficient(pi, p);
      CHECK(v.efficient == oracle);
      if (!v.efficient) {
        ++inefficient;
        REQUIRE(v.dominating);
        for (std::size_t i = 0; i < n; ++i) CHECK(weakly_dominates(v.dominating->row(i), pi.row(i), p[i]));
      }
    }
  }
  CHECK(inefficient > 0);
}

TEST_CASE("deterministic allocations at n = 3: both notions equal Pareto efficiency") {
  const auto orders = all_orders(3);
  UnambiguousChecker checker;
  for (std::uint64_t k = 0; k < profile_count(3); ++k) {
    const auto p = profile_at(3, k);
    for (const auto& assignment : orders) {
      const auto pi = permutation_allocation(assignment);
      const bool oracle = deterministic_pareto(assignment, p);
      CHECK(checker.check(pi, p).efficient == oracle);
      CHECK(is_ambiguously_efficient(pi, p).efficient == oracle);
    }
  }
}

TEST_CASE("pruned and exhaustive witness searches agree") {
  std::mt19937_64 rng(17);
  int inefficient = 0;
  for (std::size_t n = 3; n <= 4; ++n) {
    for (int trial = 0; trial < 40; ++trial) {
      const auto pi = random_mixture(n, 1 + rng() % 4, rng);
      const auto p = rng() % 3 == 0 ? identical_profile(n) : random_profile(n, rng);
      const auto pruned = is_unambiguously_efficient(pi, p, WitnessSearch::Pruned);
      const auto full = is_unambiguously_efficient(pi, p, WitnessSearch::Exhaustive);
      CHECK(pruned.efficient == full.efficient);
      if (!pruned.efficient) {
        ++inefficient;
        CHECK_NOTHROW(validate_certificate(*pruned.certificate, pi, p));
        CHECK_NOTHROW(validate_certificate(*full.certificate, pi, p));
      }
    }
  }
  CHECK(inefficient > 0);
}

TEST_CASE("unambiguous efficiency implies sd-efficiency") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 3 + rng() % 2;
    const auto pi = random_mixture(n, 1 + rng() % 3, rng);
    const auto p = random_profile(n, rng);
    if (is_unambiguously_efficient(pi, p).efficient) CHECK(is_ambiguously_efficient(pi, p).efficient);
  }
}

TEST_CASE("verdict depends only on the support") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + rng() % 2;
    const auto pi = random_mixture(n, 2 + rng() % 3, rng);
    const auto p = random_profile(n, rng);
    const auto base = is_unambiguously_efficient(pi, p).efficient;
    // same support, different weights: mix with the uniform-over-support version
    const auto d = decompose(pi);
    Decomposition reweighted = d;
    Rat total = 0;
    for (std::size_t t = 0; t < reweighted.terms.size(); ++t) {
      reweighted.terms[t].weight = Rat(static_cast<long>(t + 1));
      total += reweighted.terms[t].weight;
    }
    for (auto& t : reweighted.terms) t.weight /= total;
    const auto other = recompose(reweighted);
    REQUIRE(other.support() == pi.support());
    CHECK(is_unambiguously_efficient(other, p).efficient == base);
    const auto probe = support_invariance_probe(pi, p, 5, 100 + trial);
    CHECK(probe.base_efficient == base);
    if (base) CHECK(probe.passed);
  }
}

TEST_CASE("necessary conditions flag only inefficient allocations") {
  std::mt19937_64 rng(31);
  int flagged = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 3 + rng() % 2;
    const auto pi = random_mixture(n, 1 + rng() % 4, rng);
    const auto p = rng() % 2 ? identical_profile(n) : random_profile(n, rng);
    if (!check_support_bound(pi).empty() || !check_no_gaps(pi, p).empty()) {
      ++flagged;
      CHECK_FALSE(is_unambiguously_efficient(pi, p).efficient);
    }
  }
  CHECK(flagged > 0);
}

TEST_CASE("gap example") {
  // everyone: a > b > c; agent 0 holds a and c, agent 1 holds b
  const auto pi = alloc({{"1/2", "0", "1/2"}, {"0", "1", "0"}, {"1/2", "0", "1/2"}});
  const auto gaps = check_no_gaps(pi, identical_profile(3));
  REQUIRE_FALSE(gaps.empty());
  CHECK(std::find(gaps.begin(), gaps.end(), GapViolation{0, 1, 0, 1, 2}) != gaps.end());
  CHECK(check_support_bound(pi).empty());
}

TEST_CASE("certificates become Pareto improvements at constructed utilities") {
  std::mt19937_64 rng(37);
  int converted = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3 + rng() % 2;
    const auto pi = random_mixture(n, 2 + rng() % 3, rng);
    const auto p = rng() % 2 ? identical_profile(n) : random_profile(n, rng);
    const auto v = is_unambiguously_efficient(pi, p);
    if (v.efficient) continue;
    ++converted;
    const auto f = falsifying_utilities(*v.certificate, pi, p);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(is_consistent(f.utilities[i], p[i]));
      const Rat before = dot(f.utilities[i], pi.row(i));
      const Rat after = dot(f.utilities[i], f.improved.row(i));
      if (v.certificate->witnesses[i]) {
        CHECK(after > before);
      } else {
        CHECK(after == before);
      }
    }
    const auto pareto = is_pareto_efficient_at(pi, f.utilities);
    CHECK_FALSE(pareto.efficient);
  }
  CHECK(converted > 0);
}

TEST_CASE("tampered certificates are rejected") {
  const auto pi = incomparable_trade_allocation();
  const auto p = identical_profile(3);
  auto cert = *is_unambiguously_efficient(pi, p).certificate;
  auto broken = cert;
  broken.shift(0, 0) += 1;
  CHECK_THROWS_AS(validate_certificate(broken, pi, p), Error);
  auto no_witness = cert;
  for (auto& w : no_witness.witnesses) w.reset();
  CHECK_THROWS_AS(validate_certificate(no_witness, pi, p), Error);
}

TEST_CASE("Pareto LP at fixed utilities") {
  const auto p = identical_profile(3);
  std::vector<VnmUtility> u(3, VnmUtility{3, 2, 0});
  // uniform is Pareto efficient for identical utilities (total welfare fixed)
  CHECK(is_pareto_efficient_at(uniform_allocation(3), u).efficient);
  // different utilities: agent 0 values b highly, agent 1 values a
  std::vector<VnmUtility> w{{10, 9, 0}, {10, 1, 0}, {10, 5, 0}};
  const auto v = is_pareto_efficient_at(uniform_allocation(3), w);
  REQUIRE_FALSE(v.efficient);
  for (std::size_t i = 0; i < 3; ++i) CHECK(dot(w[i], v.improvement->row(i)) >= dot(w[i], uniform_allocation(3).row(i)));
}

TEST_CASE("sampled utilities are consistent and distinct") {
  std::mt19937_64 rng(41);
  const auto pref = Preference({3, 1, 0, 2});
  for (int t = 0; t < 100; ++t) {
    const auto u = sample_consistent_vnm(pref, rng);
    CHECK(is_consistent(u, pref));
    for (auto v : u) {
      CHECK(v > 0);
      CHECK(v <= 1);
    }
  }
  CHECK_FALSE(is_consistent(VnmUtility{1, 1, 0}, Preference::identity(3)));
}

TEST_CASE("memoizing checker reuses verdicts by support") {
  UnambiguousChecker c;
  const auto p = identical_profile(3);
  c.check(uniform_allocation(3), p);
  c.check(alloc({{"1/2", "1/4", "1/4"}, {"1/4", "1/2", "1/4"}, {"1/4", "1/4", "1/2"}}), p);
  CHECK(c.cache_size() == 1);
  CHECK(c.hits() == 1);
}
