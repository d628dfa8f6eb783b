#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ordalloc/core.hpp"
#include "ordalloc/efficiency.hpp"

namespace ordalloc {

/// A mechanism for a fixed number of agents. `eval` must be pure.
struct MechanismHandle {
  std::string name;
  std::size_t agents = 0;
  std::function<Allocation(const Profile&)> eval;
};

enum class Axiom {
  StrategyProof,
  NonBossy,
  Neutral,
  BoundedInvariance,
  Symmetric,
  SupportMonotonicInvariance,
  UnambiguousEfficiency,
  AmbiguousEfficiency,
};

std::string to_string(Axiom axiom);
std::optional<Axiom> axiom_from_string(const std::string& name);
std::vector<Axiom> all_axioms();

/// The properties a hierarchy of monarchies and diarchies is known to have.
std::vector<Axiom> hierarchy_axioms();

enum class CheckMode { Exhaustive, Sampled };

struct CheckOptions {
  CheckMode mode = CheckMode::Exhaustive;
  std::uint64_t seed = 1;
  /// Sampled mode only: number of random instances.
  std::uint64_t trials = 10'000;
  /// Sampled neutrality checks: object relabelings per drawn profile.
  std::size_t relabelings_per_profile = 10;
};

/// One concrete test of an axiom. Which fields are used depends on the axiom.
struct AxiomInstance {
  Profile profile;
  std::optional<AgentIndex> agent;
  std::optional<Preference> deviation;
  /// Neutrality: object a is renamed so that the new profile ranks a where
  /// the old one ranked relabeling[a].
  std::vector<ObjectIndex> relabeling;
};

struct AxiomWitness {
  AxiomInstance instance;
  std::string detail;
};

enum class Verdict { HoldsExhaustive, HoldsSampled, Violated };

std::string to_string(Verdict verdict);

struct AxiomReport {
  Axiom axiom;
  Verdict verdict = Verdict::HoldsExhaustive;
  std::uint64_t instances = 0;
  std::optional<AxiomWitness> witness;

  bool holds() const { return verdict != Verdict::Violated; }
};

/// Evaluates a single instance; returns a description of the violation if any.
std::optional<std::string> find_violation(Axiom axiom, const MechanismHandle& mechanism, const AxiomInstance& instance);

/// Exhaustive mode enumerates every profile (and every deviation or
/// relabeling) and is limited to three agents, otherwise ModeUnsupported.
/// The first violation in enumeration order is reported.
AxiomReport check_axiom(Axiom axiom, const MechanismHandle& mechanism, const CheckOptions& options);

/// True iff the report's witness still exhibits the violation.
bool replay(const AxiomReport& report, const MechanismHandle& mechanism);

/// Mechanisms with known properties, used to exercise the checks.
namespace fixtures {

MechanismHandle serial_dictatorship(std::size_t agents);
MechanismHandle uniform_rsd(std::size_t agents);
MechanismHandle constant(std::size_t agents);

/// Order 0,1,2,... when agent 0's favourite is object 0, else 0,2,1,3,...
MechanismHandle order_switching_sd(std::size_t agents);

/// Agent 0 takes their favourite; the rest follow 1,2,3,... unless agent
/// 1's favourite is the object agent 0 took, in which case 1,3,2,4,...
MechanismHandle branching_sd(std::size_t agents);

/// Deterministic immediate acceptance: in round r every unassigned agent
/// applies to their r-th choice and each still-free object keeps the
/// applicant ranked highest in its priority (priority[object] lists agents
/// best first). Acceptances are final.
MechanismHandle immediate_acceptance(std::vector<std::vector<AgentIndex>> priority);

/// Agent 0 takes their favourite; then 1 picks before 2 when agent 1 ranks
/// object 2 last, and 2 before 1 otherwise. Reacts to a change far below
/// agent 1's top.
MechanismHandle lower_rank_keyed_sd();

std::vector<std::string> names();
/// Looks up a fixture by name for the given number of agents.
std::optional<MechanismHandle> by_name(const std::string& name, std::size_t agents);

}  // namespace fixtures

}  // namespace ordalloc
