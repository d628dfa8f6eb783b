#pragma once

#include <stdexcept>
#include <string>

namespace ordalloc {

enum class Errc {
  // core
  NonSquare,
  TooSmall,
  RowSumViolation,
  ColumnSumViolation,
  RangeViolation,
  InvalidPreference,
  InvalidPermutation,
  DimensionMismatch,
  // lp
  MalformedProgram,
  // efficiency
  InvalidCertificate,
  // mechanisms
  InsufficientSupply,
  InfeasiblePartial,
  RuleNamesAllocatedAgent,
  DiarchyOnFractionalResidual,
  InvalidDirective,
  RuleExhausted,
  ResidualInvariantBroken,
  BlockNotAdjacentInBase,
  InvalidOrderLottery,
  // axioms
  ModeUnsupported,
  // welfare
  DegenerateDenominator,
  InadmissibleEpsilon,
  // cli
  ParseError,
};

const char* to_string(Errc code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  Errc code() const noexcept { return code_; }
  /// The message without the error-code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace ordalloc
