#pragma once

#include <span>
#include <vector>

#include "ordalloc/rational.hpp"

namespace ordalloc::lp {

enum class Relation { LessEq, Equal, GreaterEq };

struct Constraint {
  std::vector<Rat> coefficients;
  Relation relation = Relation::LessEq;
  Rat rhs;
};

/// maximize objective . x subject to the constraints. Variables are free
/// unless marked nonnegative; an empty objective means pure feasibility.
struct LinearProgram {
  std::size_t variables = 0;
  std::vector<Constraint> constraints;
  std::vector<Rat> objective;
  std::vector<bool> nonnegative;

  explicit LinearProgram(std::size_t variable_count = 0) : variables(variable_count), nonnegative(variable_count, false) {}

  void add(std::vector<Rat> coefficients, Relation relation, Rat rhs) {
    constraints.push_back({std::move(coefficients), relation, std::move(rhs)});
  }
  void set_nonnegative(std::size_t var, bool value = true) { nonnegative.at(var) = value; }
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
  Status status = Status::Infeasible;
  Rat value;
  /// Optimal vertex, or a feasible point when Unbounded.
  std::vector<Rat> point;
  /// Improving ray when Unbounded: point + t * ray is feasible for all t >= 0.
  std::vector<Rat> ray;
};

/// Exact two-phase primal simplex with Bland's rule. Throws
/// Error{MalformedProgram} on inconsistent dimensions.
Solution solve(const LinearProgram& program);

/// Exact substitution check of every constraint (and sign restriction).
bool satisfies(const LinearProgram& program, std::span<const Rat> point);

}  // namespace ordalloc::lp
