#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ordalloc/core.hpp"

namespace ordalloc {

/// Priority order over agents, first dictator first.
using AgentOrder = std::vector<AgentIndex>;

/// Lottery over agent orders. Weights must be positive and sum to one.
struct OrderLottery {
  struct Entry {
    AgentOrder order;
    Rat weight;
  };
  std::vector<Entry> entries;

  static OrderLottery degenerate(AgentOrder order);
  static OrderLottery uniform(const std::vector<AgentOrder>& orders);
};

/// Remaining mass per object, each in [0, 1].
using SupplyVector = std::vector<Rat>;

/// Rows of agents not allocated at this step are empty.
struct PartialAllocation {
  std::vector<std::optional<Lottery>> rows;

  std::vector<AgentIndex> allocated() const;
};

using History = std::vector<PartialAllocation>;

struct StepSignature {
  std::vector<AgentIndex> agents;  // ascending
  std::vector<bool> integral;      // parallel to agents
  friend bool operator==(const StepSignature&, const StepSignature&) = default;
};

/// What a sequencing rule may observe: who was served at each step, whether
/// each of those lotteries was degenerate, and whether the leftover supply is.
struct HistorySignature {
  std::size_t agents = 0;
  std::vector<StepSignature> steps;
  bool residual_integral = true;

  bool is_allocated(AgentIndex agent) const;
  std::vector<AgentIndex> allocated() const;
  std::vector<AgentIndex> unallocated() const;
  /// Integrality of the given agent's lottery, if allocated.
  std::optional<bool> integral(AgentIndex agent) const;
  bool all_integral() const;
  friend bool operator==(const HistorySignature&, const HistorySignature&) = default;
};

HistorySignature signature_of(const History& history, const SupplyVector& residual_supply);

struct Monarchy {
  AgentIndex agent;
  friend bool operator==(const Monarchy&, const Monarchy&) = default;
};

/// With probability alpha `first` picks before `second`.
struct Diarchy {
  AgentIndex first;
  AgentIndex second;
  Rat alpha;
  friend bool operator==(const Diarchy&, const Diarchy&) = default;
};

using Directive = std::variant<Monarchy, Diarchy>;

std::string describe(const Directive& directive);

using SequencingRule = std::function<Directive(const HistorySignature&)>;

/// Greedy best lottery for the agent out of the supply. Throws
/// InsufficientSupply when less than one unit remains.
Lottery top_allocation(AgentIndex agent, const SupplyVector& supply, const Profile& profile);

/// The agent's greedy lottery after `first` took theirs.
Lottery top_after(AgentIndex agent, AgentIndex first, const SupplyVector& supply, const Profile& profile);

/// Throws InvalidDirective for alpha outside (0, 1) or out-of-range agents.
PartialAllocation apply_directive(const Directive& directive, const SupplyVector& supply, const Profile& profile);

/// Throws InfeasiblePartial if the partial allocation takes more than is left.
SupplyVector residual(const SupplyVector& supply, const PartialAllocation& partial);

struct HmdStep {
  SupplyVector supply;
  HistorySignature signature;
  Directive directive;
  PartialAllocation partial;
};

struct HmdResult {
  Allocation allocation;
  History history;
  std::vector<HmdStep> trace;
};

/// Objects whose supply is strictly between 0 and 1.
std::vector<ObjectIndex> fractional_objects(const SupplyVector& supply);

/// Throws ResidualInvariantBroken unless at most two objects are fractional
/// and, when two are, their masses sum to one.
void check_residual_invariant(const SupplyVector& supply);

/// Runs the hierarchy of monarchies and diarchies driven by the rule until
/// every agent is served. Errors: RuleNamesAllocatedAgent,
/// DiarchyOnFractionalResidual, InsufficientSupply, ResidualInvariantBroken.
HmdResult hmd_run(const SequencingRule& rule, const Profile& profile);

/// Rule that makes each agent of the order a monarch in turn.
SequencingRule monarchy_rule(AgentOrder order);

void check_agent_order(const AgentOrder& order, std::size_t agents);

Allocation serial_dictatorship(const AgentOrder& order, const Profile& profile);

/// Throws InvalidOrderLottery.
void validate_order_lottery(const OrderLottery& lottery, std::size_t agents);

Allocation rsd(const OrderLottery& lottery, const Profile& profile);

/// The k! orders that permute `block` inside positions
/// [position, position + k) of base. Throws BlockNotAdjacentInBase.
std::vector<AgentOrder> make_adjacent_k_set(const AgentOrder& base, const std::vector<AgentIndex>& block, std::size_t position);

/// True iff the orders are exactly the k! rearrangements of some block of k
/// consecutive agents, all other positions fixed.
bool is_adjacent_k_set(const std::vector<AgentOrder>& orders, std::size_t k);

/// Every order of {0..n-1}, lexicographic.
std::vector<AgentOrder> all_orders(std::size_t n);

/// Declarative sequencing rule: the first entry whose conditions all hold
/// and whose candidate list still names an unallocated agent decides.
struct RuleEntry {
  enum class Action { MonarchyFirstOf, DiarchyFirstTwoOf };

  std::optional<std::size_t> step;
  std::optional<std::vector<AgentIndex>> allocated;  // exact set
  std::optional<bool> residual_integral;
  std::optional<bool> last_step_integral;
  std::optional<bool> all_integral;
  /// Agents whose lotteries must have the given integrality.
  std::vector<std::pair<AgentIndex, bool>> agent_integral;

  Action action = Action::MonarchyFirstOf;
  std::vector<AgentIndex> candidates;
  Rat alpha = Rat(1, 2);

  bool matches(const HistorySignature& signature) const;
};

struct DecisionList {
  std::string name;
  std::vector<RuleEntry> entries;

  /// Throws RuleExhausted if nothing applies.
  Directive decide(const HistorySignature& signature) const;
  SequencingRule rule() const;
};

/// Built-in five-agent rules: "example-cascade" opens with a 1/3 diarchy of
/// agents 0 and 1 and then alternates between diarchies and monarchies
/// depending on integrality; "example-table" follows a fixed table keyed on
/// the served set.
std::optional<DecisionList> builtin_rule(const std::string& name);
std::vector<std::string> builtin_rule_names();

}  // namespace ordalloc
