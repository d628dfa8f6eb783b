#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordalloc/axioms.hpp"
#include "ordalloc/core.hpp"
#include "ordalloc/mechanisms.hpp"

namespace ordalloc::cli {

using Json = nlohmann::ordered_json;

struct MechanismSpec {
  enum class Kind { SerialDictatorship, Rsd, Hmd, Fixture };
  Kind kind = Kind::SerialDictatorship;
  AgentOrder order;          // SerialDictatorship
  OrderLottery lottery;      // Rsd
  DecisionList rule;         // Hmd
  std::string fixture;       // Fixture
};

/// Contents of a problem file. Names are kept so reports can use them.
struct ProblemFile {
  std::vector<std::string> objects;
  std::vector<std::string> agents;
  std::optional<Profile> profile;
  std::optional<Allocation> allocation;
  std::optional<MechanismSpec> mechanism;
};

/// Throws Error{ParseError} naming the offending field, or the line and
/// column for malformed JSON. Errors from the core types (for example an
/// allocation whose rows do not sum to one) propagate unchanged.
ProblemFile parse_problem(const std::string& text);
ProblemFile load_problem(const std::filesystem::path& path);

MechanismHandle make_mechanism(const MechanismSpec& spec, std::size_t agents);

Json rational_matrix(const RatMatrix& matrix);
Json rational_vector(std::span<const Rat> values);

/// {ambiguous, unambiguous, certificate?, falsifying_utilities?,
///  dominating?, lemma_violations}. Needs preferences and an allocation.
Json check_report(const ProblemFile& problem);

/// Allocation, the call trace for hierarchies, optional decomposition.
Json run_report(const ProblemFile& problem, bool with_decomposition);

Json axiom_report_json(const AxiomReport& report, const ProblemFile& problem);

Json symmetry_cost_report(std::size_t n, const Rat& epsilon);

Json decompose_report(const ProblemFile& problem);

}  // namespace ordalloc::cli
