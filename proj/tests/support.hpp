#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ordalloc/axioms.hpp"
#include "ordalloc/core.hpp"
#include "ordalloc/mechanisms.hpp"

namespace testing {

using namespace ordalloc;

/// Preferences written as strings of object letters, best first: "aedcb".
inline Preference pref(const std::string& letters) {
  std::vector<ObjectIndex> r;
  for (char c : letters) r.push_back(static_cast<ObjectIndex>(c - 'a'));
  return Preference(r);
}

inline Profile profile(const std::vector<std::string>& rows) {
  std::vector<Preference> prefs;
  for (const auto& r : rows) prefs.push_back(pref(r));
  return Profile(prefs);
}

inline Profile identical_profile(std::size_t n) { return Profile(std::vector<Preference>(n, Preference::identity(n))); }

inline Allocation alloc(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::vector<Rat>> m;
  for (const auto& r : rows) {
    std::vector<Rat> row;
    for (const auto& v : r) row.push_back(parse_rat(v));
    m.push_back(row);
  }
  return validate_allocation(m);
}

inline Allocation uniform_allocation(std::size_t n) {
  RatMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < n; ++a) m(i, a) = Rat(1, static_cast<long>(n));
  }
  return validate_allocation(m);
}

// Five-agent profiles on which the built-in rules take different paths.
inline Profile cascade_profile() { return profile({"aedcb", "abdec", "becad", "aebcd", "baced"}); }
inline Profile cascade_alt_profile() { return profile({"abdce", "badec", "becad", "aebdc", "baced"}); }

inline Profile serial_profile() { return profile({"adcb", "abdc", "bcad", "abcd"}); }

// Everyone ranks a > b > c; agent 0 mixes a and c, the others hedge.
inline Allocation incomparable_trade_allocation() {
  return alloc({{"1/2", "0", "1/2"}, {"1/4", "1/2", "1/4"}, {"1/4", "1/2", "1/4"}});
}

// Agent 0 spreads over all eight objects; agent k >= 1 holds its top and a8.
inline Profile wide_support_profile() {
  std::vector<Preference> prefs{Preference::identity(8)};
  for (ObjectIndex top = 0; top < 7; ++top) {
    std::vector<ObjectIndex> r{top, 7};
    for (ObjectIndex a = 0; a < 7; ++a) {
      if (a != top) r.push_back(a);
    }
    prefs.emplace_back(r);
  }
  return Profile(prefs);
}

inline Allocation wide_support_allocation() {
  RatMatrix m(8, 8);
  for (std::size_t a = 0; a < 8; ++a) m(0, a) = Rat(1, 8);
  for (std::size_t i = 1; i < 8; ++i) {
    m(i, i - 1) = Rat(7, 8);
    m(i, 7) = Rat(1, 8);
  }
  return validate_allocation(m);
}

/// Two-step decision list for three agents: `first` at the empty history,
/// `second` (if any) next, then whoever is left.
inline DecisionList three_agent_rule(const std::string& name, RuleEntry first, std::optional<RuleEntry> second) {
  DecisionList list{name, {}};
  first.step = 0;
  list.entries.push_back(first);
  if (second) {
    second->step = 1;
    list.entries.push_back(*second);
  }
  RuleEntry rest;
  rest.candidates = {0, 1, 2};
  list.entries.push_back(rest);
  return list;
}

inline RuleEntry monarchy_of(AgentIndex i) {
  RuleEntry e;
  e.candidates = {i};
  return e;
}

inline RuleEntry diarchy_of(AgentIndex i, AgentIndex j, Rat alpha) {
  RuleEntry e;
  e.action = RuleEntry::Action::DiarchyFirstTwoOf;
  e.candidates = {i, j};
  e.alpha = alpha;
  return e;
}

/// Every hierarchy of monarchies and diarchies for three agents with
/// weights in {1/3, 1/2, 2/3}: 9 opening diarchies, 9 monarch-then-diarchy
/// rules and the 6 serial dictatorships.
inline std::vector<DecisionList> three_agent_rule_family() {
  std::vector<DecisionList> out;
  const std::vector<Rat> weights{Rat(1, 3), Rat(1, 2), Rat(2, 3)};
  for (AgentIndex i = 0; i < 3; ++i) {
    const AgentIndex j = (i + 1) % 3;
    const AgentIndex k = (i + 2) % 3;
    for (const auto& w : weights) {
      out.push_back(three_agent_rule("d" + std::to_string(i) + std::to_string(j) + "@" + to_string(w), diarchy_of(i, j, w), std::nullopt));
      out.push_back(three_agent_rule("m" + std::to_string(i) + "-d" + std::to_string(j) + std::to_string(k) + "@" + to_string(w), monarchy_of(i),
                                     diarchy_of(j, k, w)));
    }
    out.push_back(three_agent_rule("m" + std::to_string(i) + "-m" + std::to_string(j), monarchy_of(i), monarchy_of(j)));
    out.push_back(three_agent_rule("m" + std::to_string(i) + "-m" + std::to_string(k), monarchy_of(i), monarchy_of(k)));
  }
  return out;
}

/// The distinct adjacent-2 order sets of three agents.
inline std::vector<std::vector<AgentOrder>> adjacent_two_sets() {
  std::set<std::set<AgentOrder>> seen;
  std::vector<std::vector<AgentOrder>> out;
  for (const auto& base : all_orders(3)) {
    for (std::size_t pos = 0; pos < 2; ++pos) {
      auto set = make_adjacent_k_set(base, {base[pos], base[pos + 1]}, pos);
      if (seen.insert(std::set<AgentOrder>(set.begin(), set.end())).second) out.push_back(set);
    }
  }
  return out;
}

inline MechanismHandle hmd_handle(const DecisionList& list, std::size_t agents) {
  return {list.name, agents, [rule = list.rule()](const Profile& p) { return hmd_run(rule, p).allocation; }};
}

}  // namespace testing
