#include "ordalloc/mechanisms.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace ordalloc {

namespace {

bool lottery_integral(const Lottery& lottery) {
  return std::all_of(lottery.begin(), lottery.end(), [](const Rat& v) { return is_integral(v); });
}

void check_agent(AgentIndex agent, std::size_t agents) {
  if (agent >= agents) throw Error(Errc::InvalidDirective, "agent " + std::to_string(agent) + " out of range");
}

/// Collapses a diarchy of an agent with itself.
Directive normalize(const Directive& directive) {
  if (const auto* d = std::get_if<Diarchy>(&directive); d && d->first == d->second) return Monarchy{d->first};
  return directive;
}

std::vector<AgentIndex> directive_agents(const Directive& directive) {
  if (const auto* m = std::get_if<Monarchy>(&directive)) return {m->agent};
  const auto& d = std::get<Diarchy>(directive);
  return {d.first, d.second};
}

}  // namespace

OrderLottery OrderLottery::degenerate(AgentOrder order) { return OrderLottery{{{std::move(order), Rat(1)}}}; }

OrderLottery OrderLottery::uniform(const std::vector<AgentOrder>& orders) {
  OrderLottery out;
  for (const auto& o : orders) out.entries.push_back({o, Rat(1, static_cast<long>(orders.size()))});
  return out;
}

std::vector<AgentIndex> PartialAllocation::allocated() const {
  std::vector<AgentIndex> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i]) out.push_back(i);
  }
  return out;
}

bool HistorySignature::is_allocated(AgentIndex agent) const {
  for (const auto& s : steps) {
    if (std::find(s.agents.begin(), s.agents.end(), agent) != s.agents.end()) return true;
  }
  return false;
}

std::vector<AgentIndex> HistorySignature::allocated() const {
  std::vector<AgentIndex> out;
  for (const auto& s : steps) out.insert(out.end(), s.agents.begin(), s.agents.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<AgentIndex> HistorySignature::unallocated() const {
  std::vector<AgentIndex> out;
  for (AgentIndex i = 0; i < agents; ++i) {
    if (!is_allocated(i)) out.push_back(i);
  }
  return out;
}

std::optional<bool> HistorySignature::integral(AgentIndex agent) const {
  for (const auto& s : steps) {
    for (std::size_t k = 0; k < s.agents.size(); ++k) {
      if (s.agents[k] == agent) return s.integral[k];
    }
  }
  return std::nullopt;
}

bool HistorySignature::all_integral() const {
  return std::all_of(steps.begin(), steps.end(),
                     [](const StepSignature& s) { return std::all_of(s.integral.begin(), s.integral.end(), [](bool b) { return b; }); });
}

HistorySignature signature_of(const History& history, const SupplyVector& residual_supply) {
  HistorySignature sig;
  sig.agents = residual_supply.size();
  for (const auto& partial : history) {
    StepSignature step;
    for (std::size_t i = 0; i < partial.rows.size(); ++i) {
      if (!partial.rows[i]) continue;
      step.agents.push_back(i);
      step.integral.push_back(lottery_integral(*partial.rows[i]));
    }
    sig.steps.push_back(std::move(step));
  }
  sig.residual_integral = lottery_integral(residual_supply);
  return sig;
}

std::string describe(const Directive& directive) {
  if (const auto* m = std::get_if<Monarchy>(&directive)) return "monarchy(" + std::to_string(m->agent) + ")";
  const auto& d = std::get<Diarchy>(directive);
  return "diarchy(" + std::to_string(d.first) + "," + std::to_string(d.second) + "," + to_string(d.alpha) + ")";
}

Lottery top_allocation(AgentIndex agent, const SupplyVector& supply, const Profile& profile) {
  if (supply.size() != profile.size()) throw Error(Errc::DimensionMismatch, "supply length differs from object count");
  if (sum(supply) < 1) throw Error(Errc::InsufficientSupply, "less than one unit of supply left for agent " + std::to_string(agent));
  const auto& pref = profile[agent];
  Lottery out = zeros(supply.size());
  Rat need = 1;
  for (std::size_t p = 0; p < pref.size() && sgn(need) > 0; ++p) {
    const auto a = pref.object_at(p);
    const Rat take = std::min(need, supply[a]);
    out[a] = take;
    need -= take;
  }
  return out;
}

Lottery top_after(AgentIndex agent, AgentIndex first, const SupplyVector& supply, const Profile& profile) {
  const auto taken = top_allocation(first, supply, profile);
  SupplyVector rest = supply;
  for (std::size_t a = 0; a < rest.size(); ++a) rest[a] -= taken[a];
  return top_allocation(agent, rest, profile);
}

PartialAllocation apply_directive(const Directive& raw, const SupplyVector& supply, const Profile& profile) {
  const std::size_t n = profile.size();
  const Directive directive = normalize(raw);
  PartialAllocation out{std::vector<std::optional<Lottery>>(n)};
  if (const auto* m = std::get_if<Monarchy>(&directive)) {
    check_agent(m->agent, n);
    out.rows[m->agent] = top_allocation(m->agent, supply, profile);
    return out;
  }
  const auto& d = std::get<Diarchy>(directive);
  check_agent(d.first, n);
  check_agent(d.second, n);
  if (sgn(d.alpha) <= 0 || d.alpha >= 1) throw Error(Errc::InvalidDirective, "diarchy weight " + to_string(d.alpha) + " outside (0,1)");
  const Rat beta = 1 - d.alpha;
  const auto first_alone = top_allocation(d.first, supply, profile);
  const auto second_alone = top_allocation(d.second, supply, profile);
  const auto first_after = top_after(d.first, d.second, supply, profile);
  const auto second_after = top_after(d.second, d.first, supply, profile);
  Lottery row_first(n), row_second(n);
  for (std::size_t a = 0; a < n; ++a) {
    row_first[a] = d.alpha * first_alone[a] + beta * first_after[a];
    row_second[a] = d.alpha * second_after[a] + beta * second_alone[a];
  }
  out.rows[d.first] = std::move(row_first);
  out.rows[d.second] = std::move(row_second);
  return out;
}

SupplyVector residual(const SupplyVector& supply, const PartialAllocation& partial) {
  SupplyVector out = supply;
  for (const auto& row : partial.rows) {
    if (!row) continue;
    if (row->size() != out.size()) throw Error(Errc::DimensionMismatch, "partial row length differs from supply");
    for (std::size_t a = 0; a < out.size(); ++a) out[a] -= (*row)[a];
  }
  for (std::size_t a = 0; a < out.size(); ++a) {
    if (sgn(out[a]) < 0) throw Error(Errc::InfeasiblePartial, "object " + std::to_string(a) + " over-allocated by " + to_string(Rat(-out[a])));
  }
  return out;
}

std::vector<ObjectIndex> fractional_objects(const SupplyVector& supply) {
  std::vector<ObjectIndex> out;
  for (std::size_t a = 0; a < supply.size(); ++a) {
    if (!is_integral(supply[a])) out.push_back(a);
  }
  return out;
}

void check_residual_invariant(const SupplyVector& supply) {
  const auto frac = fractional_objects(supply);
  if (frac.size() > 2) throw Error(Errc::ResidualInvariantBroken, std::to_string(frac.size()) + " objects partially available");
  if (frac.size() == 2 && supply[frac[0]] + supply[frac[1]] != 1) {
    throw Error(Errc::ResidualInvariantBroken, "the two partially available objects do not sum to one unit");
  }
}

HmdResult hmd_run(const SequencingRule& rule, const Profile& profile) {
  const std::size_t n = profile.size();
  SupplyVector supply(n, Rat(1));
  History history;
  std::vector<HmdStep> trace;
  RatMatrix total(n, n);
  std::size_t served = 0;
  while (served < n) {
    check_residual_invariant(supply);
    auto sig = signature_of(history, supply);
    Directive directive = normalize(rule(sig));
    for (auto agent : directive_agents(directive)) {
      check_agent(agent, n);
      if (sig.is_allocated(agent)) {
        throw Error(Errc::RuleNamesAllocatedAgent, "rule chose agent " + std::to_string(agent) + ", already served");
      }
    }
    if (std::holds_alternative<Diarchy>(directive) && !sig.residual_integral) {
      throw Error(Errc::DiarchyOnFractionalResidual, "rule chose " + describe(directive) + " while supply is fractional");
    }
    auto partial = apply_directive(directive, supply, profile);
    auto next = residual(supply, partial);
    for (auto i : partial.allocated()) {
      for (std::size_t a = 0; a < n; ++a) total(i, a) = (*partial.rows[i])[a];
      ++served;
    }
    trace.push_back({supply, std::move(sig), directive, partial});
    history.push_back(std::move(partial));
    supply = std::move(next);
  }
  return HmdResult{validate_allocation(std::move(total)), std::move(history), std::move(trace)};
}

SequencingRule monarchy_rule(AgentOrder order) {
  return [order = std::move(order)](const HistorySignature& sig) -> Directive {
    for (auto agent : order) {
      if (!sig.is_allocated(agent)) return Monarchy{agent};
    }
    throw Error(Errc::RuleExhausted, "every agent in the order is served");
  };
}

void check_agent_order(const AgentOrder& order, std::size_t agents) {
  try {
    check_permutation(order, agents);
  } catch (const Error& e) {
    throw Error(Errc::InvalidOrderLottery, std::string("not an agent order: ") + e.detail());
  }
}

Allocation serial_dictatorship(const AgentOrder& order, const Profile& profile) {
  const std::size_t n = profile.size();
  check_agent_order(order, n);
  std::vector<bool> taken(n, false);
  std::vector<ObjectIndex> assignment(n);
  for (auto agent : order) {
    for (auto a : profile[agent].ranking()) {
      if (!taken[a]) {
        taken[a] = true;
        assignment[agent] = a;
        break;
      }
    }
  }
  return permutation_allocation(assignment);
}

void validate_order_lottery(const OrderLottery& lottery, std::size_t agents) {
  if (lottery.entries.empty()) throw Error(Errc::InvalidOrderLottery, "no orders");
  Rat total = 0;
  for (const auto& e : lottery.entries) {
    check_agent_order(e.order, agents);
    if (sgn(e.weight) <= 0) throw Error(Errc::InvalidOrderLottery, "order weight " + to_string(e.weight) + " is not positive");
    total += e.weight;
  }
  if (total != 1) throw Error(Errc::InvalidOrderLottery, "order weights sum to " + to_string(total));
}

Allocation rsd(const OrderLottery& lottery, const Profile& profile) {
  const std::size_t n = profile.size();
  validate_order_lottery(lottery, n);
  RatMatrix m(n, n);
  for (const auto& e : lottery.entries) m += e.weight * serial_dictatorship(e.order, profile).matrix();
  return validate_allocation(std::move(m));
}

std::vector<AgentOrder> make_adjacent_k_set(const AgentOrder& base, const std::vector<AgentIndex>& block, std::size_t position) {
  check_agent_order(base, base.size());
  const std::size_t k = block.size();
  if (k == 0 || position + k > base.size()) throw Error(Errc::BlockNotAdjacentInBase, "block does not fit at that position");
  std::vector<AgentIndex> in_base(base.begin() + static_cast<std::ptrdiff_t>(position), base.begin() + static_cast<std::ptrdiff_t>(position + k));
  std::vector<AgentIndex> wanted = block;
  std::sort(in_base.begin(), in_base.end());
  std::sort(wanted.begin(), wanted.end());
  if (in_base != wanted || std::adjacent_find(wanted.begin(), wanted.end()) != wanted.end()) {
    throw Error(Errc::BlockNotAdjacentInBase, "block agents do not occupy the given positions of the base order");
  }
  std::vector<AgentOrder> out;
  do {
    AgentOrder o = base;
    std::copy(wanted.begin(), wanted.end(), o.begin() + static_cast<std::ptrdiff_t>(position));
    out.push_back(std::move(o));
  } while (std::next_permutation(wanted.begin(), wanted.end()));
  return out;
}

bool is_adjacent_k_set(const std::vector<AgentOrder>& orders, std::size_t k) {
  if (orders.empty() || k == 0) return false;
  const auto& first = orders.front();
  if (k > first.size()) return false;
  const std::set<AgentOrder> given(orders.begin(), orders.end());
  if (given.size() != orders.size()) return false;
  for (std::size_t p = 0; p + k <= first.size(); ++p) {
    std::vector<AgentIndex> block(first.begin() + static_cast<std::ptrdiff_t>(p), first.begin() + static_cast<std::ptrdiff_t>(p + k));
    try {
      const auto built = make_adjacent_k_set(first, block, p);
      if (std::set<AgentOrder>(built.begin(), built.end()) == given) return true;
    } catch (const Error&) {
      return false;
    }
  }
  return false;
}

std::vector<AgentOrder> all_orders(std::size_t n) {
  AgentOrder o(n);
  std::iota(o.begin(), o.end(), AgentIndex{0});
  std::vector<AgentOrder> out;
  do out.push_back(o);
  while (std::next_permutation(o.begin(), o.end()));
  return out;
}

bool RuleEntry::matches(const HistorySignature& sig) const {
  if (step && *step != sig.steps.size()) return false;
  if (allocated && *allocated != sig.allocated()) return false;
  if (residual_integral && *residual_integral != sig.residual_integral) return false;
  if (last_step_integral) {
    bool last = true;
    if (!sig.steps.empty()) {
      const auto& flags = sig.steps.back().integral;
      last = std::all_of(flags.begin(), flags.end(), [](bool b) { return b; });
    }
    if (last != *last_step_integral) return false;
  }
  if (all_integral && *all_integral != sig.all_integral()) return false;
  for (const auto& [agent, flag] : agent_integral) {
    const auto v = sig.integral(agent);
    if (!v || *v != flag) return false;
  }
  return true;
}

Directive DecisionList::decide(const HistorySignature& sig) const {
  for (const auto& entry : entries) {
    if (!entry.matches(sig)) continue;
    std::vector<AgentIndex> open;
    for (auto c : entry.candidates) {
      if (c < sig.agents && !sig.is_allocated(c)) open.push_back(c);
    }
    if (open.empty()) continue;
    if (entry.action == RuleEntry::Action::DiarchyFirstTwoOf && open.size() >= 2) return Diarchy{open[0], open[1], entry.alpha};
    return Monarchy{open[0]};
  }
  throw Error(Errc::RuleExhausted, "rule '" + name + "' has no entry for this history");
}

SequencingRule DecisionList::rule() const {
  return [list = *this](const HistorySignature& sig) { return list.decide(sig); };
}

std::optional<DecisionList> builtin_rule(const std::string& name) {
  using Action = RuleEntry::Action;
  auto diarchy = [](std::vector<AgentIndex> c, Rat alpha) {
    RuleEntry e;
    e.action = Action::DiarchyFirstTwoOf;
    e.candidates = std::move(c);
    e.alpha = std::move(alpha);
    return e;
  };
  auto monarchy = [](std::vector<AgentIndex> c) {
    RuleEntry e;
    e.candidates = std::move(c);
    return e;
  };
  if (name == "example-cascade") {
    DecisionList list{name, {}};
    auto opening = diarchy({0, 1}, Rat(1, 3));
    opening.step = 0;
    auto pair = diarchy({2, 3, 4}, Rat(1, 2));
    pair.residual_integral = true;
    pair.last_step_integral = true;
    list.entries = {opening, pair, monarchy({4, 3, 2})};
    return list;
  }
  if (name == "example-table") {
    DecisionList list{name, {}};
    auto opening = diarchy({0, 1}, Rat(1, 3));
    opening.step = 0;
    auto second_pair = diarchy({2, 3}, Rat(1, 2));
    second_pair.allocated = std::vector<AgentIndex>{0, 1};
    second_pair.agent_integral = {{0, true}, {1, true}};
    auto third = monarchy({2});
    third.allocated = std::vector<AgentIndex>{0, 1};
    auto last_pair = diarchy({3, 4}, Rat(1, 2));
    last_pair.allocated = std::vector<AgentIndex>{0, 1, 2};
    last_pair.residual_integral = true;
    auto fourth = monarchy({3});
    fourth.allocated = std::vector<AgentIndex>{0, 1, 2};
    auto fifth = monarchy({4});
    fifth.allocated = std::vector<AgentIndex>{0, 1, 2, 3};
    list.entries = {opening, second_pair, third, last_pair, fourth, fifth};
    return list;
  }
  return std::nullopt;
}

std::vector<std::string> builtin_rule_names() { return {"example-cascade", "example-table"}; }

}  // namespace ordalloc
