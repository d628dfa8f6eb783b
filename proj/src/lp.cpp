#include "ordalloc/lp.hpp"

#include <limits>
#include <optional>
#include <string>

#include "ordalloc/error.hpp"

namespace ordalloc::lp {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

enum class ColumnKind { Structural, Slack, Artificial };

/// Dense simplex tableau in canonical form with respect to `basis`.
/// Row r holds B^-1 A and the basic values in the last column; `cost` holds
/// the reduced-cost row of a maximization (entering columns are negative).
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : cols_(cols), data_(rows, std::vector<Rat>(cols + 1, Rat(0))), basis_(rows, kNone), cost_(cols + 1, Rat(0)) {}

  std::size_t rows() const { return data_.size(); }
  std::size_t cols() const { return cols_; }
  Rat& at(std::size_t r, std::size_t c) { return data_[r][c]; }
  Rat& rhs(std::size_t r) { return data_[r][cols_]; }
  std::size_t& basic(std::size_t r) { return basis_[r]; }
  std::vector<Rat>& cost() { return cost_; }
  const std::vector<std::size_t>& basis() const { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    auto& prow = data_[pr];
    const Rat piv = prow[pc];
    std::vector<std::size_t> nz;
    for (std::size_t c = 0; c <= cols_; ++c) {
      if (sgn(prow[c]) != 0) {
        prow[c] /= piv;
        nz.push_back(c);
      }
    }
    auto eliminate = [&](std::vector<Rat>& row) {
      if (sgn(row[pc]) == 0) return;
      const Rat factor = row[pc];
      for (auto c : nz) row[c] -= factor * prow[c];
    };
    for (std::size_t r = 0; r < data_.size(); ++r) {
      if (r != pr) eliminate(data_[r]);
    }
    eliminate(cost_);
    basis_[pr] = pc;
  }

  /// Re-expresses the cost row in terms of the current basis.
  void canonicalize_cost() {
    for (std::size_t r = 0; r < data_.size(); ++r) {
      const std::size_t b = basis_[r];
      if (sgn(cost_[b]) == 0) continue;
      const Rat factor = cost_[b];
      for (std::size_t c = 0; c <= cols_; ++c) {
        if (sgn(data_[r][c]) != 0) cost_[c] -= factor * data_[r][c];
      }
    }
  }

  void drop_row(std::size_t r) {
    data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(r));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
  }

  enum class Outcome { Optimal, Unbounded };

  /// Bland's rule iterations over the allowed columns. On Unbounded,
  /// `entering` names the column with no blocking row.
  Outcome iterate(const std::vector<bool>& allowed, std::size_t& entering) {
    for (;;) {
      entering = kNone;
      for (std::size_t c = 0; c < cols_; ++c) {
        if (allowed[c] && sgn(cost_[c]) < 0) {
          entering = c;
          break;
        }
      }
      if (entering == kNone) return Outcome::Optimal;
      std::size_t leaving = kNone;
      Rat best_ratio;
      for (std::size_t r = 0; r < data_.size(); ++r) {
        if (sgn(data_[r][entering]) <= 0) continue;
        Rat ratio = data_[r][cols_] / data_[r][entering];
        if (leaving == kNone || ratio < best_ratio || (ratio == best_ratio && basis_[r] < basis_[leaving])) {
          leaving = r;
          best_ratio = std::move(ratio);
        }
      }
      if (leaving == kNone) return Outcome::Unbounded;
      pivot(leaving, entering);
    }
  }

 private:
  std::size_t cols_;
  std::vector<std::vector<Rat>> data_;
  std::vector<std::size_t> basis_;
  std::vector<Rat> cost_;
};

void validate(const LinearProgram& program) {
  if (program.nonnegative.size() != program.variables) {
    throw Error(Errc::MalformedProgram, "sign vector has wrong length");
  }
  if (!program.objective.empty() && program.objective.size() != program.variables) {
    throw Error(Errc::MalformedProgram, "objective has " + std::to_string(program.objective.size()) + " coefficients for " +
                                            std::to_string(program.variables) + " variables");
  }
  for (std::size_t k = 0; k < program.constraints.size(); ++k) {
    if (program.constraints[k].coefficients.size() != program.variables) {
      throw Error(Errc::MalformedProgram, "constraint " + std::to_string(k) + " has wrong length");
    }
  }
}

}  // namespace

Solution solve(const LinearProgram& program) {
  validate(program);
  const std::size_t nvars = program.variables;
  const std::size_t m = program.constraints.size();

  // Column layout: structural (free variables split into +/- parts), then one
  // slack/surplus per inequality, then one artificial per row lacking a slack basis.
  std::vector<std::size_t> pos_col(nvars), neg_col(nvars, kNone);
  std::vector<ColumnKind> kind;
  for (std::size_t j = 0; j < nvars; ++j) {
    pos_col[j] = kind.size();
    kind.push_back(ColumnKind::Structural);
    if (!program.nonnegative[j]) {
      neg_col[j] = kind.size();
      kind.push_back(ColumnKind::Structural);
    }
  }
  std::vector<bool> flip(m, false);
  std::vector<Relation> rel(m);
  std::vector<std::size_t> slack_col(m, kNone), art_col(m, kNone);
  for (std::size_t r = 0; r < m; ++r) {
    const auto& con = program.constraints[r];
    flip[r] = sgn(con.rhs) < 0;
    rel[r] = con.relation;
    if (flip[r] && rel[r] != Relation::Equal) rel[r] = rel[r] == Relation::LessEq ? Relation::GreaterEq : Relation::LessEq;
    if (rel[r] != Relation::Equal) {
      slack_col[r] = kind.size();
      kind.push_back(ColumnKind::Slack);
    }
  }
  for (std::size_t r = 0; r < m; ++r) {
    if (rel[r] != Relation::LessEq) {
      art_col[r] = kind.size();
      kind.push_back(ColumnKind::Artificial);
    }
  }

  Tableau t(m, kind.size());
  for (std::size_t r = 0; r < m; ++r) {
    const auto& con = program.constraints[r];
    for (std::size_t j = 0; j < nvars; ++j) {
      if (sgn(con.coefficients[j]) == 0) continue;
      Rat v = flip[r] ? Rat(-con.coefficients[j]) : con.coefficients[j];
      if (neg_col[j] != kNone) t.at(r, neg_col[j]) = -v;
      t.at(r, pos_col[j]) = std::move(v);
    }
    t.rhs(r) = flip[r] ? Rat(-con.rhs) : con.rhs;
    if (slack_col[r] != kNone) t.at(r, slack_col[r]) = rel[r] == Relation::LessEq ? 1 : -1;
    if (art_col[r] != kNone) {
      t.at(r, art_col[r]) = 1;
      t.basic(r) = art_col[r];
    } else {
      t.basic(r) = slack_col[r];
    }
  }

  // Phase 1: maximize -sum(artificials).
  std::vector<bool> allowed(kind.size(), true);
  std::size_t entering = kNone;
  bool has_artificial = false;
  for (std::size_t c = 0; c < kind.size(); ++c) {
    if (kind[c] == ColumnKind::Artificial) {
      t.cost()[c] = 1;
      has_artificial = true;
    }
  }
  if (has_artificial) {
    t.canonicalize_cost();
    t.iterate(allowed, entering);
    if (sgn(t.cost()[t.cols()]) != 0) return Solution{Status::Infeasible, Rat(0), {}, {}};
    // Drive zero-valued artificials out of the basis; rows where that is
    // impossible are linearly dependent and can be dropped.
    for (std::size_t r = t.rows(); r-- > 0;) {
      if (kind[t.basic(r)] != ColumnKind::Artificial) continue;
      std::size_t replacement = kNone;
      for (std::size_t c = 0; c < kind.size(); ++c) {
        if (kind[c] != ColumnKind::Artificial && sgn(t.at(r, c)) != 0) {
          replacement = c;
          break;
        }
      }
      if (replacement == kNone) {
        t.drop_row(r);
      } else {
        t.pivot(r, replacement);
      }
    }
    for (std::size_t c = 0; c < kind.size(); ++c) allowed[c] = kind[c] != ColumnKind::Artificial;
  }

  // Phase 2.
  for (auto& v : t.cost()) v = 0;
  if (!program.objective.empty()) {
    for (std::size_t j = 0; j < nvars; ++j) {
      if (sgn(program.objective[j]) == 0) continue;
      t.cost()[pos_col[j]] = -program.objective[j];
      if (neg_col[j] != kNone) t.cost()[neg_col[j]] = program.objective[j];
    }
    t.canonicalize_cost();
  }
  const auto outcome = program.objective.empty() ? Tableau::Outcome::Optimal : t.iterate(allowed, entering);

  std::vector<Rat> column_value(kind.size(), Rat(0));
  for (std::size_t r = 0; r < t.rows(); ++r) column_value[t.basis()[r]] = t.rhs(r);
  auto to_original = [&](const std::vector<Rat>& cols) {
    std::vector<Rat> x(nvars);
    for (std::size_t j = 0; j < nvars; ++j) {
      x[j] = cols[pos_col[j]];
      if (neg_col[j] != kNone) x[j] -= cols[neg_col[j]];
    }
    return x;
  };

  Solution sol;
  sol.point = to_original(column_value);
  if (outcome == Tableau::Outcome::Unbounded) {
    std::vector<Rat> direction(kind.size(), Rat(0));
    direction[entering] = 1;
    for (std::size_t r = 0; r < t.rows(); ++r) direction[t.basis()[r]] = -t.at(r, entering);
    sol.status = Status::Unbounded;
    sol.ray = to_original(direction);
  } else {
    sol.status = Status::Optimal;
  }
  sol.value = program.objective.empty() ? Rat(0) : dot(program.objective, sol.point);
  return sol;
}

bool satisfies(const LinearProgram& program, std::span<const Rat> point) {
  if (point.size() != program.variables) return false;
  for (std::size_t j = 0; j < program.variables; ++j) {
    if (program.nonnegative[j] && sgn(point[j]) < 0) return false;
  }
  for (const auto& con : program.constraints) {
    const Rat lhs = dot(con.coefficients, point);
    const int c = cmp(lhs, con.rhs);
    switch (con.relation) {
      case Relation::LessEq:
        if (c > 0) return false;
        break;
      case Relation::Equal:
        if (c != 0) return false;
        break;
      case Relation::GreaterEq:
        if (c < 0) return false;
        break;
    }
  }
  return true;
}

}  // namespace ordalloc::lp
