// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "ordalloc/axioms.hpp"
#include "ordalloc/bvn.hpp"
#include "ordalloc/efficiency.hpp"
#include "ordalloc/mechanisms.hpp"
#include "ordalloc/sd.hpp"
#include "ordalloc/welfare.hpp"
#include "support.hpp"

using namespace ordalloc;
using namespace testing;

namespace {

/// Every allocation produced below, with the profile it was produced at.
class Corpus {
 public:
  void add(const Allocation& allocation, const std::optional<Profile>& profile) {
    std::ostringstream key;
    for (std::size_t i = 0; i < allocation.size(); ++i) {
      for (auto v : allocation.row(i)) key << v << ',';
    }
    if (profile) {
      for (const auto& p : *profile) {
        for (auto a : p.ranking()) key << a;
        key << ';';
      }
    }
    if (seen_.emplace(key.str(), items_.size()).second) items_.emplace_back(allocation, profile);
  }

  void add_trace(const HmdResult& result) {
    for (const auto& step : result.trace) supplies_.push_back(step.supply);
    supplies_.push_back(zeros(result.allocation.size()));
  }

  const std::vector<std::pair<Allocation, std::optional<Profile>>>& items() const { return items_; }
  const std::vector<SupplyVector>& supplies() const { return supplies_; }

 private:
  std::map<std::string, std::size_t> seen_;
  std::vector<std::pair<Allocation, std::optional<Profile>>> items_;
  std::vector<SupplyVector> supplies_;
};

Corpus corpus;
UnambiguousChecker checker;

MechanismHandle recording_hmd(const DecisionList& list, std::size_t agents) {
  return {list.name, agents, [rule = list.rule()](const Profile& p) {
            auto result = hmd_run(rule, p);
            corpus.add_trace(result);
            corpus.add(result.allocation, p);
            return result.allocation;
          }};
}

MechanismHandle recording(MechanismHandle inner) {
  return {inner.name, inner.agents, [eval = inner.eval](const Profile& p) {
            auto out = eval(p);
            corpus.add(out, p);
            return out;
          }};
}

std::vector<Profile> all_profiles(std::size_t n) {
  std::vector<Profile> out;
  for (std::uint64_t k = 0; k < profile_count(n); ++k) out.push_back(profile_at(n, k));
  return out;
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& id, const std::string& title, double budget_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (seconds > budget_seconds) {
    out.pass = false;
    out.detail += " (over the " + std::to_string(static_cast<int>(budget_seconds)) + " s budget)";
  }
  if (!out.pass) ++failures;
  std::cout << (out.pass ? "PASS " : "FAIL ") << std::setw(3) << std::left << id << ' ' << title << " [" << std::fixed << std::setprecision(2)
            << seconds << " s]";
  if (!out.detail.empty()) std::cout << " -- " << out.detail;
  std::cout << std::endl;
}

std::string axiom_summary(const std::vector<AxiomReport>& reports) {
  std::string out;
  for (const auto& r : reports) out += (out.empty() ? "" : ", ") + to_string(r.axiom) + "=" + to_string(r.verdict);
  return out;
}

std::vector<AxiomReport> check_all(const MechanismHandle& m, const CheckOptions& options) {
  std::vector<AxiomReport> out;
  for (auto a : hierarchy_axioms()) out.push_back(check_axiom(a, m, options));
  return out;
}

/// Fails exactly `expected` among the five hierarchy properties, and its
/// witness replays.
Outcome fails_only(const MechanismHandle& m, Axiom expected, const CheckOptions& options) {
  const auto reports = check_all(m, options);
  bool ok = true;
  for (const auto& r : reports) {
    const bool should_hold = r.axiom != expected;
    if (r.holds() != should_hold) ok = false;
    if (!r.holds() && !replay(r, m)) ok = false;
  }
  return {ok, m.name + " at n=" + std::to_string(m.agents) + ": " + axiom_summary(reports)};
}

// Four-agent hierarchies for the sampled runs.
DecisionList four_agent_cascade() {
  DecisionList list{"cascade-4", {}};
  RuleEntry open = diarchy_of(0, 1, Rat(1, 3));
  open.step = 0;
  RuleEntry pair = diarchy_of(2, 3, Rat(1, 2));
  pair.residual_integral = true;
  pair.last_step_integral = true;
  RuleEntry rest;
  rest.candidates = {3, 2};
  list.entries = {open, pair, rest};
  return list;
}

DecisionList four_agent_monarch_first() {
  DecisionList list{"monarch-first-4", {}};
  RuleEntry open = monarchy_of(2);
  open.step = 0;
  RuleEntry pair = diarchy_of(0, 3, Rat(1, 4));
  pair.step = 1;
  RuleEntry late_pair = diarchy_of(1, 0, Rat(2, 3));
  late_pair.residual_integral = true;
  RuleEntry rest;
  rest.candidates = {1, 0, 3};
  list.entries = {open, pair, late_pair, rest};
  return list;
}

}  // namespace

int main() {
  const auto profiles3 = all_profiles(3);
  std::cout << "acceptance criteria (exact arithmetic throughout)" << std::endl;

  criterion("1a", "cascade rule reproduces both five-agent matrices", 5, [] {
    const auto rule = builtin_rule("example-cascade")->rule();
    const auto first = hmd_run(rule, cascade_profile());
    const auto second = hmd_run(rule, cascade_alt_profile());
    corpus.add_trace(first);
    corpus.add_trace(second);
    corpus.add(first.allocation, cascade_profile());
    corpus.add(second.allocation, cascade_alt_profile());
    const auto want_first = alloc({{"1/3", "0", "0", "0", "2/3"},
                                   {"2/3", "1/3", "0", "0", "0"},
                                   {"0", "0", "0", "1", "0"},
                                   {"0", "0", "2/3", "0", "1/3"},
                                   {"0", "2/3", "1/3", "0", "0"}});
    const auto want_second = alloc({{"1", "0", "0", "0", "0"},
                                    {"0", "1", "0", "0", "0"},
                                    {"0", "0", "1/2", "0", "1/2"},
                                    {"0", "0", "0", "1/2", "1/2"},
                                    {"0", "0", "1/2", "1/2", "0"}});
    return Outcome{first.allocation == want_first && second.allocation == want_second, ""};
  });

  criterion("1b", "table rule reproduces its five-agent matrix", 5, [] {
    const auto result = hmd_run(builtin_rule("example-table")->rule(), cascade_profile());
    corpus.add_trace(result);
    corpus.add(result.allocation, cascade_profile());
    const auto want = alloc({{"1/3", "0", "0", "0", "2/3"},
                             {"2/3", "1/3", "0", "0", "0"},
                             {"0", "2/3", "0", "0", "1/3"},
                             {"0", "0", "1/2", "1/2", "0"},
                             {"0", "0", "1/2", "1/2", "0"}});
    return Outcome{result.allocation == want, ""};
  });

  criterion("1c", "serial dictatorship 1-2-3-4 returns (a,b,c,d) in 4 steps", 5, [] {
    const auto result = hmd_run(monarchy_rule({0, 1, 2, 3}), serial_profile());
    corpus.add_trace(result);
    corpus.add(result.allocation, serial_profile());
    const auto direct = serial_dictatorship({0, 1, 2, 3}, serial_profile());
    const std::vector<ObjectIndex> want{0, 1, 2, 3};
    return Outcome{result.allocation == permutation_allocation(want) && direct == result.allocation && result.trace.size() == 4,
                   std::to_string(result.trace.size() + 1) + " calls including the terminal one"};
  });

  criterion("1d", "incomparable-trade allocation: ambiguous yes, unambiguous no", 5, [] {
    const auto pi = incomparable_trade_allocation();
    const auto p = identical_profile(3);
    corpus.add(pi, p);
    const auto amb = is_ambiguously_efficient(pi, p);
    const auto una = is_unambiguously_efficient(pi, p);
    if (una.certificate) validate_certificate(*una.certificate, pi, p);
    return Outcome{amb.efficient && !una.efficient && una.certificate.has_value(), ""};
  });

  criterion("1e", "eight-agent wide-support allocation is unambiguously efficient", 5, [] {
    const auto pi = wide_support_allocation();
    const auto p = wide_support_profile();
    corpus.add(pi, p);
    const auto una = is_unambiguously_efficient(pi, p);
    return Outcome{una.efficient, std::to_string(una.systems_solved) + " witness systems solved"};
  });

  criterion("2", "adjacent-2 rsd always unambiguously efficient; every 1-order superset fails somewhere", 300, [&] {
    const auto sets = adjacent_two_sets();
    std::size_t checked = 0;
    for (const auto& set : sets) {
      // any interior weight gives the same support, hence the same verdict
      const auto lottery = OrderLottery::uniform(set);
      for (const auto& p : profiles3) {
        const auto out = rsd(lottery, p);
        corpus.add(out, p);
        ++checked;
        if (!checker.check(out, p).efficient) return Outcome{false, "adjacent-2 rsd inefficient"};
      }
    }
    std::size_t supersets = 0;
    for (const auto& set : sets) {
      for (const auto& extra : all_orders(3)) {
        if (std::find(set.begin(), set.end(), extra) != set.end()) continue;
        auto bigger = set;
        bigger.push_back(extra);
        const auto lottery = OrderLottery::uniform(bigger);
        bool found = false;
        for (const auto& p : profiles3) {
          const auto out = rsd(lottery, p);
          corpus.add(out, p);
          if (!checker.check(out, p).efficient) {
            found = true;
            break;
          }
        }
        if (!found) return Outcome{false, "a superset never fails"};
        ++supersets;
      }
    }
    return Outcome{sets.size() == 6 && supersets == 24,
                   std::to_string(sets.size()) + " adjacent-2 sets x 216 profiles; " + std::to_string(supersets) + " supersets each refuted"};
  });

  criterion("3", "uniform rsd: ambiguously efficient everywhere, certificates become Pareto improvements", 120, [&] {
    const auto lottery = OrderLottery::uniform(all_orders(3));
    std::size_t certified = 0;
    bool identical_fails = false;
    for (const auto& p : profiles3) {
      const auto out = rsd(lottery, p);
      corpus.add(out, p);
      if (!is_ambiguously_efficient(out, p).efficient) return Outcome{false, "not ambiguously efficient"};
      const auto verdict = is_unambiguously_efficient(out, p);
      if (p == identical_profile(3)) identical_fails = !verdict.efficient;
      if (verdict.efficient) continue;
      ++certified;
      const auto& cert = *verdict.certificate;
      validate_certificate(cert, out, p);
      const auto f = falsifying_utilities(cert, out, p);
      for (std::size_t i = 0; i < 3; ++i) {
        if (!is_consistent(f.utilities[i], p[i])) return Outcome{false, "inconsistent utility"};
        const Rat before = dot(f.utilities[i], out.row(i));
        const Rat after = dot(f.utilities[i], f.improved.row(i));
        if (cert.witnesses[i] ? !(after > before) : after != before) return Outcome{false, "constructed utilities do not rank the shift"};
      }
      if (is_pareto_efficient_at(out, f.utilities).efficient) return Outcome{false, "no Pareto improvement at constructed utilities"};
    }
    return Outcome{identical_fails, std::to_string(certified) + " inefficient profiles, each certificate converted and verified"};
  });

  const auto family = three_agent_rule_family();
  criterion("4", "hierarchies pass the five properties (n=3 exhaustive, n=4,5 sampled)", 900, [&] {
    for (const auto& rule : family) {
      const auto reports = check_all(recording_hmd(rule, 3), {});
      for (const auto& r : reports) {
        if (r.verdict != Verdict::HoldsExhaustive) return Outcome{false, rule.name + ": " + axiom_summary(reports)};
      }
    }
    CheckOptions sampled;
    sampled.mode = CheckMode::Sampled;
    sampled.seed = 20240611;
    sampled.trials = 10'000;
    std::vector<std::pair<DecisionList, std::size_t>> larger{
        {four_agent_cascade(), 4}, {four_agent_monarch_first(), 4}, {*builtin_rule("example-cascade"), 5}, {*builtin_rule("example-table"), 5}};
    for (const auto& [rule, n] : larger) {
      const auto reports = check_all(hmd_handle(rule, n), sampled);
      for (const auto& r : reports) {
        if (r.verdict != Verdict::HoldsSampled) return Outcome{false, rule.name + ": " + axiom_summary(reports)};
      }
    }
    return Outcome{true, std::to_string(family.size()) + " three-agent rules exhaustive; 2 four-agent and 2 five-agent rules x 10000 draws"};
  });

  criterion("5", "each three-agent hierarchy equals rsd over an adjacent-2 set or one order", 120, [&] {
    struct Candidate {
      std::string name;
      OrderLottery lottery;
    };
    // Weights are read off the identical-preferences profile, where the two
    // orders of an adjacent pair give the contested object to different agents.
    auto fitted = [&](const MechanismHandle& m) {
      std::vector<Candidate> out;
      const auto base = m.eval(identical_profile(3));
      for (const auto& set : adjacent_two_sets()) {
        std::size_t pos = 0;
        while (set[0][pos] == set[1][pos]) ++pos;
        const Rat weight = base(set[0][pos], pos);
        if (sgn(weight) > 0 && weight < 1) out.push_back({"adjacent-2", OrderLottery{{{set[0], weight}, {set[1], 1 - weight}}}});
      }
      for (const auto& o : all_orders(3)) out.push_back({"single order", OrderLottery::degenerate(o)});
      return out;
    };
    std::size_t adjacent = 0;
    for (const auto& rule : family) {
      const auto m = hmd_handle(rule, 3);
      bool matched = false;
      for (const auto& c : fitted(m)) {
        bool all = true;
        for (const auto& p : profiles3) {
          if (!(m.eval(p) == rsd(c.lottery, p))) {
            all = false;
            break;
          }
        }
        if (all) {
          matched = true;
          adjacent += c.name == "adjacent-2" ? 1 : 0;
          break;
        }
      }
      if (!matched) return Outcome{false, rule.name + " matches no candidate"};
    }
    return Outcome{true, std::to_string(family.size()) + " rules matched (" + std::to_string(adjacent) + " adjacent-2, " +
                             std::to_string(family.size() - adjacent) + " single order)"};
  });

  criterion("6a", "uniform rsd fails only unambiguous efficiency (n=3)", 600,
            [] { return fails_only(recording(fixtures::uniform_rsd(3)), Axiom::UnambiguousEfficiency, {}); });
  criterion("6b", "order-switching serial dictatorship fails only neutrality (n=3)", 600,
            [] { return fails_only(recording(fixtures::order_switching_sd(3)), Axiom::Neutral, {}); });
  criterion("6c", "branching serial dictatorship fails only non-bossiness (n=4, sampled)", 600, [] {
    CheckOptions sampled;
    sampled.mode = CheckMode::Sampled;
    sampled.seed = 7;
    return fails_only(fixtures::branching_sd(4), Axiom::NonBossy, sampled);
  });
  criterion("6d", "immediate acceptance fails strategy-proofness, holds the rest (n=3)", 600,
            [] { return fails_only(recording(fixtures::by_name("immediate-acceptance", 3).value()), Axiom::StrategyProof, {}); });

  criterion("7", "symmetry cost at e=1e-6: gain within 1e-4 of (n-2)/n, partners indifferent, uniform sd-efficient", 60, [] {
    const Rat epsilon(1, 1'000'000);
    std::string detail;
    for (std::size_t n = 3; n <= 8; ++n) {
      const auto r = symmetry_cost(n, epsilon);
      corpus.add(r.traded, identical_profile(n));
      const Rat distance = abs(Rat(r.gain - r.limit));
      if (!(distance < Rat(1, 10'000))) return Outcome{false, "n=" + std::to_string(n) + " gain " + to_string(r.gain)};
      const auto partner = partner_utility(n, epsilon);
      const auto uniform = uniform_allocation(n);
      for (std::size_t j = 1; j < n; ++j) {
        if (dot(partner, r.traded.row(j)) != dot(partner, uniform.row(j))) return Outcome{false, "partner utility moved"};
      }
      if (!(r.gain >= r.bound)) return Outcome{false, "gain below the delta bound"};
      if (!is_ambiguously_efficient(uniform, identical_profile(n)).efficient) return Outcome{false, "uniform not sd-efficient"};
      corpus.add(uniform, identical_profile(n));
      detail += (detail.empty() ? "gaps to limit: " : ", ") + std::string("n=") + std::to_string(n) + " " + std::to_string(distance.get_d());
    }
    return Outcome{true, detail};
  });

  criterion("8", "structural invariants over the whole corpus", 600, [] {
    std::size_t condition_flagged = 0;
    for (const auto& [allocation, profile] : corpus.items()) {
      const auto d = decompose(allocation);
      const std::size_t n = allocation.size();
      if (!(recompose(d) == allocation) || d.terms.size() > (n - 1) * (n - 1) + 1) return Outcome{false, "decomposition round trip"};
      if (!profile) continue;
      const bool flagged = !check_support_bound(allocation).empty() || !check_no_gaps(allocation, *profile).empty();
      if (flagged) {
        ++condition_flagged;
        if (checker.check(allocation, *profile).efficient) return Outcome{false, "necessary condition violated by an efficient allocation"};
      }
    }
    for (const auto& s : corpus.supplies()) {
      std::vector<Rat> partial;
      for (const auto& v : s) {
        if (sgn(v) > 0 && v < 1) partial.push_back(v);
      }
      if (partial.size() > 2 || (partial.size() == 2 && !is_integral(Rat(partial[0] + partial[1])))) return Outcome{false, "residual invariant"};
    }
    return Outcome{true, std::to_string(corpus.items().size()) + " allocations round-tripped, " + std::to_string(condition_flagged) +
                             " flagged by the necessary conditions, " + std::to_string(corpus.supplies().size()) + " residual supplies checked"};
  });

  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
