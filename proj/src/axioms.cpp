#include "ordalloc/axioms.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "ordalloc/mechanisms.hpp"
#include "ordalloc/sd.hpp"

namespace ordalloc {

namespace {

UnambiguousChecker& shared_checker() {
  static UnambiguousChecker checker;
  return checker;
}

std::string row_text(std::span<const Rat> row) {
  std::string out = "(";
  for (std::size_t a = 0; a < row.size(); ++a) out += (a ? "," : "") + to_string(row[a]);
  return out + ")";
}

std::uint64_t factorial(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

/// Mechanism outputs, cached by profile index when every profile will be visited.
class Evaluator {
 public:
  Evaluator(const MechanismHandle& mechanism, bool cache_all) : mechanism_(mechanism) {
    if (cache_all) cache_.resize(profile_count(mechanism.agents));
  }

  const Allocation& operator()(const Profile& profile) {
    if (cache_.empty()) {
      scratch_ = mechanism_.eval(profile);
      return *scratch_;
    }
    const std::uint64_t fact = factorial(profile.size());
    std::uint64_t index = 0;
    for (const auto& p : profile) index = index * fact + rank_of_permutation(p.ranking());
    auto& slot = cache_[index];
    if (!slot) slot = mechanism_.eval(profile);
    return *slot;
  }

 private:
  const MechanismHandle& mechanism_;
  std::vector<std::optional<Allocation>> cache_;
  std::optional<Allocation> scratch_;
};

std::optional<std::string> violation(Axiom axiom, const AxiomInstance& inst, Evaluator& eval) {
  const auto& profile = inst.profile;
  const std::size_t n = profile.size();
  switch (axiom) {
    case Axiom::StrategyProof: {
      const auto i = *inst.agent;
      const Allocation truthful = eval(profile);
      const Allocation& lie = eval(profile.with(i, *inst.deviation));
      if (weakly_dominates(truthful.row(i), lie.row(i), profile[i])) return std::nullopt;
      const auto t = cumulative_prefix(truthful.row(i), profile[i]);
      const auto l = cumulative_prefix(lie.row(i), profile[i]);
      std::size_t k = 0;
      while (k < n && !(l[k] > t[k])) ++k;
      return "agent " + std::to_string(i) + " gets " + row_text(lie.row(i)) + " instead of " + row_text(truthful.row(i)) +
             " by misreporting; top-" + std::to_string(k + 1) + " mass rises from " + to_string(t[k]) + " to " + to_string(l[k]);
    }
    case Axiom::NonBossy: {
      const auto i = *inst.agent;
      const Allocation before = eval(profile);
      const Allocation& after = eval(profile.with(i, *inst.deviation));
      if (!std::equal(before.row(i).begin(), before.row(i).end(), after.row(i).begin()) || before == after) return std::nullopt;
      for (std::size_t j = 0; j < n; ++j) {
        if (!std::equal(before.row(j).begin(), before.row(j).end(), after.row(j).begin())) {
          return "agent " + std::to_string(i) + " keeps " + row_text(before.row(i)) + " but agent " + std::to_string(j) + " moves from " +
                 row_text(before.row(j)) + " to " + row_text(after.row(j));
        }
      }
      return std::nullopt;
    }
    case Axiom::Neutral: {
      const auto& rho = inst.relabeling;
      const Allocation original = eval(profile);
      const Allocation& renamed = eval(apply_object_permutation(profile, inverse_permutation(rho)));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < n; ++a) {
          if (renamed(i, a) != original(i, rho[a])) {
            return "after relabeling, agent " + std::to_string(i) + " gets " + to_string(renamed(i, a)) + " of object " + std::to_string(a) +
                   " but held " + to_string(original(i, rho[a])) + " of object " + std::to_string(rho[a]);
          }
        }
      }
      return std::nullopt;
    }
    case Axiom::BoundedInvariance: {
      const auto i = *inst.agent;
      const auto& old_rank = profile[i].ranking();
      const auto& new_rank = inst.deviation->ranking();
      std::size_t common = 0;
      while (common < n && old_rank[common] == new_rank[common]) ++common;
      if (common == 0) return std::nullopt;
      const Allocation before = eval(profile);
      const Allocation& after = eval(profile.with(i, *inst.deviation));
      for (std::size_t p = 0; p < common; ++p) {
        const auto a = old_rank[p];
        for (std::size_t j = 0; j < n; ++j) {
          if (before(j, a) != after(j, a)) {
            return "agent " + std::to_string(i) + " reorders below object " + std::to_string(a) + "; agent " + std::to_string(j) + "'s share of it moves from " +
                   to_string(before(j, a)) + " to " + to_string(after(j, a));
          }
        }
      }
      return std::nullopt;
    }
    case Axiom::Symmetric: {
      const Allocation& out = eval(profile);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (profile[i] == profile[j] && !std::equal(out.row(i).begin(), out.row(i).end(), out.row(j).begin())) {
            return "agents " + std::to_string(i) + " and " + std::to_string(j) + " report alike but get " + row_text(out.row(i)) + " and " +
                   row_text(out.row(j));
          }
        }
      }
      return std::nullopt;
    }
    case Axiom::SupportMonotonicInvariance: {
      const auto i = *inst.agent;
      const Allocation before = eval(profile);
      const auto& old_pref = profile[i];
      const auto& new_pref = *inst.deviation;
      for (std::size_t a = 0; a < n; ++a) {
        if (sgn(before(i, a)) == 0) continue;
        for (std::size_t b = 0; b < n; ++b) {
          if (new_pref.prefers(b, a) && !old_pref.prefers(b, a)) return std::nullopt;  // not a support-monotonic change
        }
      }
      const Allocation& after = eval(profile.with(i, new_pref));
      if (before == after) return std::nullopt;
      return "agent " + std::to_string(i) + " only demotes objects outside their support, yet the allocation changes";
    }
    case Axiom::UnambiguousEfficiency: {
      const Allocation& out = eval(profile);
      const auto verdict = shared_checker().check(out, profile);
      if (verdict.efficient) return std::nullopt;
      std::string text = "allocation admits a shift leaving no agent worse: witnesses";
      for (const auto& w : verdict.certificate->witnesses) text += w ? " " + std::to_string(*w) : " -";
      return text;
    }
    case Axiom::AmbiguousEfficiency: {
      const Allocation& out = eval(profile);
      const auto verdict = is_ambiguously_efficient(out, profile);
      if (verdict.efficient) return std::nullopt;
      return "allocation is weakly dominated for every agent";
    }
  }
  return std::nullopt;
}

enum class InstanceShape { Profile, Deviation, Relabeling };

InstanceShape shape_of(Axiom axiom) {
  switch (axiom) {
    case Axiom::StrategyProof:
    case Axiom::NonBossy:
    case Axiom::BoundedInvariance:
    case Axiom::SupportMonotonicInvariance:
      return InstanceShape::Deviation;
    case Axiom::Neutral:
      return InstanceShape::Relabeling;
    default:
      return InstanceShape::Profile;
  }
}

Preference random_preference(std::size_t n, std::mt19937_64& rng) {
  std::vector<ObjectIndex> r(n);
  std::iota(r.begin(), r.end(), ObjectIndex{0});
  std::shuffle(r.begin(), r.end(), rng);
  return Preference(std::move(r));
}

Profile random_profile(std::size_t n, std::mt19937_64& rng) {
  std::vector<Preference> prefs;
  for (std::size_t i = 0; i < n; ++i) prefs.push_back(random_preference(n, rng));
  return Profile(std::move(prefs));
}

/// Deviation drawn so that the axiom's hypothesis is likely to bite.
Preference random_deviation(Axiom axiom, const Profile& profile, AgentIndex agent, Evaluator& eval, std::mt19937_64& rng) {
  const std::size_t n = profile.size();
  std::vector<ObjectIndex> r = profile[agent].ranking();
  std::bernoulli_distribution coin(0.5);
  if (axiom == Axiom::BoundedInvariance && coin(rng)) {
    const std::size_t keep = std::uniform_int_distribution<std::size_t>(1, n - 1)(rng);
    std::shuffle(r.begin() + static_cast<std::ptrdiff_t>(keep), r.end(), rng);
    return Preference(std::move(r));
  }
  if (axiom == Axiom::SupportMonotonicInvariance && coin(rng)) {
    const Allocation& out = eval(profile);
    const std::size_t moves = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    for (std::size_t m = 0; m < moves; ++m) {
      std::vector<std::size_t> outside;
      for (std::size_t p = 0; p + 1 < n; ++p) {
        if (sgn(out(agent, r[p])) == 0) outside.push_back(p);
      }
      if (outside.empty()) break;
      const std::size_t from = outside[std::uniform_int_distribution<std::size_t>(0, outside.size() - 1)(rng)];
      const std::size_t to = std::uniform_int_distribution<std::size_t>(from + 1, n - 1)(rng);
      std::rotate(r.begin() + static_cast<std::ptrdiff_t>(from), r.begin() + static_cast<std::ptrdiff_t>(from + 1),
                  r.begin() + static_cast<std::ptrdiff_t>(to + 1));
    }
    return Preference(std::move(r));
  }
  if (coin(rng)) {
    // adjacent swap: small misreports are the usual manipulations
    const std::size_t p = std::uniform_int_distribution<std::size_t>(0, n - 2)(rng);
    std::swap(r[p], r[p + 1]);
    return Preference(std::move(r));
  }
  return random_preference(n, rng);
}

}  // namespace

std::string to_string(Axiom axiom) {
  switch (axiom) {
    case Axiom::StrategyProof: return "strategy-proof";
    case Axiom::NonBossy: return "non-bossy";
    case Axiom::Neutral: return "neutral";
    case Axiom::BoundedInvariance: return "bounded-invariance";
    case Axiom::Symmetric: return "symmetric";
    case Axiom::SupportMonotonicInvariance: return "support-monotonic-invariance";
    case Axiom::UnambiguousEfficiency: return "unambiguous-efficiency";
    case Axiom::AmbiguousEfficiency: return "ambiguous-efficiency";
  }
  return "unknown";
}

std::optional<Axiom> axiom_from_string(const std::string& name) {
  for (auto a : all_axioms()) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::vector<Axiom> all_axioms() {
  return {Axiom::StrategyProof, Axiom::NonBossy, Axiom::Neutral, Axiom::BoundedInvariance,
          Axiom::Symmetric, Axiom::SupportMonotonicInvariance, Axiom::UnambiguousEfficiency, Axiom::AmbiguousEfficiency};
}

std::vector<Axiom> hierarchy_axioms() {
  return {Axiom::StrategyProof, Axiom::NonBossy, Axiom::Neutral, Axiom::BoundedInvariance, Axiom::UnambiguousEfficiency};
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::HoldsExhaustive: return "holds-exhaustive";
    case Verdict::HoldsSampled: return "holds-sampled";
    case Verdict::Violated: return "violated";
  }
  return "unknown";
}

std::optional<std::string> find_violation(Axiom axiom, const MechanismHandle& mechanism, const AxiomInstance& instance) {
  Evaluator eval(mechanism, false);
  return violation(axiom, instance, eval);
}

AxiomReport check_axiom(Axiom axiom, const MechanismHandle& mechanism, const CheckOptions& options) {
  const std::size_t n = mechanism.agents;
  if (n < kMinSize) throw Error(Errc::TooSmall, "mechanisms need at least three agents");
  AxiomReport report{axiom, Verdict::HoldsExhaustive, 0, std::nullopt};
  auto record = [&](AxiomInstance inst, Evaluator& eval) {
    ++report.instances;
    if (auto why = violation(axiom, inst, eval)) {
      report.verdict = Verdict::Violated;
      report.witness = AxiomWitness{std::move(inst), std::move(*why)};
      return true;
    }
    return false;
  };
  const auto shape = shape_of(axiom);

  if (options.mode == CheckMode::Exhaustive) {
    if (n > 3) throw Error(Errc::ModeUnsupported, "exhaustive checks are limited to three agents");
    Evaluator eval(mechanism, true);
    const auto prefs = all_orders(n);
    ProfileEnumerator profiles(n);
    while (auto profile = profiles.next()) {
      switch (shape) {
        case InstanceShape::Profile:
          if (record({*profile, std::nullopt, std::nullopt, {}}, eval)) return report;
          break;
        case InstanceShape::Deviation:
          for (AgentIndex i = 0; i < n; ++i) {
            for (const auto& r : prefs) {
              if (r == (*profile)[i].ranking()) continue;
              if (record({*profile, i, Preference(r), {}}, eval)) return report;
            }
          }
          break;
        case InstanceShape::Relabeling:
          for (const auto& rho : prefs) {
            if (std::is_sorted(rho.begin(), rho.end())) continue;
            if (record({*profile, std::nullopt, std::nullopt, rho}, eval)) return report;
          }
          break;
      }
    }
    return report;
  }

  report.verdict = Verdict::HoldsSampled;
  Evaluator eval(mechanism, false);
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<AgentIndex> pick_agent(0, n - 1);
  for (std::uint64_t t = 0; t < options.trials; ++t) {
    Profile profile = random_profile(n, rng);
    switch (shape) {
      case InstanceShape::Profile:
        if (axiom == Axiom::Symmetric && std::bernoulli_distribution(0.5)(rng)) {
          const auto i = pick_agent(rng);
          auto j = pick_agent(rng);
          if (j == i) j = (i + 1) % n;
          profile = profile.with(j, profile[i]);
        }
        if (record({profile, std::nullopt, std::nullopt, {}}, eval)) return report;
        break;
      case InstanceShape::Deviation: {
        const auto i = pick_agent(rng);
        auto dev = random_deviation(axiom, profile, i, eval, rng);
        if (dev == profile[i]) break;
        if (record({profile, i, std::move(dev), {}}, eval)) return report;
        break;
      }
      case InstanceShape::Relabeling:
        for (std::size_t k = 0; k < options.relabelings_per_profile; ++k) {
          if (record({profile, std::nullopt, std::nullopt, random_preference(n, rng).ranking()}, eval)) return report;
        }
        break;
    }
  }
  return report;
}

bool replay(const AxiomReport& report, const MechanismHandle& mechanism) {
  if (!report.witness) return false;
  return find_violation(report.axiom, mechanism, report.witness->instance).has_value();
}

namespace fixtures {

namespace {

AgentOrder identity_order(std::size_t n) {
  AgentOrder o(n);
  std::iota(o.begin(), o.end(), AgentIndex{0});
  return o;
}

}  // namespace

MechanismHandle serial_dictatorship(std::size_t agents) {
  return {"serial-dictatorship", agents, [order = identity_order(agents)](const Profile& p) { return ordalloc::serial_dictatorship(order, p); }};
}

MechanismHandle uniform_rsd(std::size_t agents) {
  return {"uniform-rsd", agents, [lottery = OrderLottery::uniform(all_orders(agents))](const Profile& p) { return rsd(lottery, p); }};
}

MechanismHandle constant(std::size_t agents) {
  return {"constant", agents, [out = permutation_allocation(identity_order(agents))](const Profile&) { return out; }};
}

MechanismHandle order_switching_sd(std::size_t agents) {
  AgentOrder straight = identity_order(agents);
  AgentOrder swapped = straight;
  std::swap(swapped[1], swapped[2]);
  return {"order-switching-sd", agents, [straight, swapped](const Profile& p) {
            return ordalloc::serial_dictatorship(p[0].top() == 0 ? straight : swapped, p);
          }};
}

MechanismHandle branching_sd(std::size_t agents) {
  AgentOrder straight = identity_order(agents);
  AgentOrder swapped = straight;
  if (agents >= 4) std::swap(swapped[2], swapped[3]);
  return {"branching-sd", agents, [straight, swapped](const Profile& p) {
            return ordalloc::serial_dictatorship(p[1].top() == p[0].top() ? swapped : straight, p);
          }};
}

MechanismHandle immediate_acceptance(std::vector<std::vector<AgentIndex>> priority) {
  const std::size_t n = priority.size();
  for (const auto& order : priority) check_agent_order(order, n);
  std::vector<std::vector<std::size_t>> rank(n, std::vector<std::size_t>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t k = 0; k < n; ++k) rank[a][priority[a][k]] = k;
  }
  return {"immediate-acceptance", n, [rank](const Profile& p) {
            const std::size_t n = p.size();
            std::vector<std::optional<ObjectIndex>> got(n);
            std::vector<bool> taken(n, false);
            for (std::size_t round = 0; round < n; ++round) {
              std::vector<std::optional<AgentIndex>> winner(n);
              for (AgentIndex i = 0; i < n; ++i) {
                if (got[i]) continue;
                const auto a = p[i].object_at(round);
                if (taken[a]) continue;
                if (!winner[a] || rank[a][i] < rank[a][*winner[a]]) winner[a] = i;
              }
              for (ObjectIndex a = 0; a < n; ++a) {
                if (!winner[a]) continue;
                got[*winner[a]] = a;
                taken[a] = true;
              }
            }
            std::vector<ObjectIndex> assignment(n);
            for (AgentIndex i = 0; i < n; ++i) assignment[i] = *got[i];
            return permutation_allocation(assignment);
          }};
}

MechanismHandle lower_rank_keyed_sd() {
  return {"lower-rank-keyed-sd", 3, [](const Profile& p) {
            const AgentOrder order = p[1].object_at(2) == 2 ? AgentOrder{0, 1, 2} : AgentOrder{0, 2, 1};
            return ordalloc::serial_dictatorship(order, p);
          }};
}

std::vector<std::string> names() {
  return {"serial-dictatorship", "uniform-rsd", "constant", "order-switching-sd", "branching-sd", "immediate-acceptance", "lower-rank-keyed-sd"};
}

std::optional<MechanismHandle> by_name(const std::string& name, std::size_t agents) {
  if (name == "serial-dictatorship") return serial_dictatorship(agents);
  if (name == "uniform-rsd") return uniform_rsd(agents);
  if (name == "constant") return constant(agents);
  if (name == "order-switching-sd") return order_switching_sd(agents);
  if (name == "branching-sd") return branching_sd(agents);
  if (name == "immediate-acceptance") return immediate_acceptance(std::vector<std::vector<AgentIndex>>(agents, identity_order(agents)));
  if (name == "lower-rank-keyed-sd" && agents == 3) return lower_rank_keyed_sd();
  return std::nullopt;
}

}  // namespace fixtures

}  // namespace ordalloc
