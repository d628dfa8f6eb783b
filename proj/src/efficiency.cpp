#include "ordalloc/efficiency.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ordalloc/bvn.hpp"
#include "ordalloc/lp.hpp"
#include "ordalloc/sd.hpp"

namespace ordalloc {

namespace {

void require_same_size(const Allocation& allocation, const Profile& profile) {
  if (allocation.size() != profile.size()) {
    throw Error(Errc::DimensionMismatch, "allocation is " + std::to_string(allocation.size()) + "x" +
                                             std::to_string(allocation.size()) + " but the profile has " +
                                             std::to_string(profile.size()) + " agents");
  }
}

// Per-agent state while building a witness system.
constexpr std::size_t kUnassigned = 0;
constexpr std::size_t kUnchanged = static_cast<std::size_t>(-1);
// any other value k is a prefix depth

struct ShiftSystem {
  lp::LinearProgram program;
  std::vector<std::size_t> slot;  // agent -> block of n variables, or kUnchanged
};

/// Linear system over shifts for the agents not pinned to Unchanged:
/// zero row and column sums, sign restrictions off the support, and a
/// prefix gain of at least one for every agent with a depth.
ShiftSystem build_shift_system(const Allocation& allocation, const Profile& profile, const std::vector<std::size_t>& choice) {
  const std::size_t n = allocation.size();
  ShiftSystem sys;
  sys.slot.assign(n, kUnchanged);
  std::size_t blocks = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (choice[i] != kUnchanged) sys.slot[i] = blocks++;
  }
  const std::size_t vars = blocks * n;
  sys.program = lp::LinearProgram(vars);
  for (std::size_t i = 0; i < n; ++i) {
    if (sys.slot[i] == kUnchanged) continue;
    for (std::size_t a = 0; a < n; ++a) {
      if (sgn(allocation(i, a)) == 0) sys.program.set_nonnegative(sys.slot[i] * n + a);
    }
    std::vector<Rat> row = zeros(vars);
    for (std::size_t a = 0; a < n; ++a) row[sys.slot[i] * n + a] = 1;
    sys.program.add(std::move(row), lp::Relation::Equal, 0);
  }
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<Rat> col = zeros(vars);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (sys.slot[i] == kUnchanged) continue;
      col[sys.slot[i] * n + a] = 1;
      any = true;
    }
    if (any) sys.program.add(std::move(col), lp::Relation::Equal, 0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (choice[i] == kUnchanged || choice[i] == kUnassigned) continue;
    std::vector<Rat> row = zeros(vars);
    for (std::size_t p = 0; p < choice[i]; ++p) row[sys.slot[i] * n + profile[i].object_at(p)] = 1;
    sys.program.add(std::move(row), lp::Relation::GreaterEq, 1);
  }
  return sys;
}

std::optional<InefficiencyCertificate> solve_witness_system(const Allocation& allocation, const Profile& profile,
                                                             const std::vector<std::size_t>& choice, std::uint64_t& counter) {
  const std::size_t n = allocation.size();
  auto sys = build_shift_system(allocation, profile, choice);
  ++counter;
  const auto sol = lp::solve(sys.program);
  if (sol.status == lp::Status::Infeasible) return std::nullopt;
  InefficiencyCertificate cert{RatMatrix(n, n), std::vector<Witness>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    if (sys.slot[i] == kUnchanged) continue;
    for (std::size_t a = 0; a < n; ++a) cert.shift(i, a) = sol.point[sys.slot[i] * n + a];
    if (choice[i] != kUnassigned) cert.witnesses[i] = choice[i];
  }
  return cert;
}

/// Deepest position (1-based) of an object in the agent's support. A
/// positive prefix gain at depth k needs mass taken from below k, so only
/// depths below this position can be witnessed.
std::size_t lowest_support_position(const Allocation& allocation, const Preference& pref, AgentIndex agent) {
  std::size_t lowest = 0;
  for (std::size_t p = 0; p < pref.size(); ++p) {
    if (sgn(allocation(agent, pref.object_at(p))) > 0) lowest = p + 1;
  }
  return lowest;
}

class PrunedSearch {
 public:
  PrunedSearch(const Allocation& allocation, const Profile& profile) : allocation_(allocation), profile_(profile) {
    const std::size_t n = allocation.size();
    depths_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto lowest = lowest_support_position(allocation, profile[i], i);
      for (std::size_t k = 1; k < lowest; ++k) depths_[i].push_back(k);
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](auto x, auto y) { return depths_[x].size() < depths_[y].size(); });
    choice_.assign(n, kUnassigned);
  }

  UnambiguousVerdict run() {
    UnambiguousVerdict verdict;
    // Agents with no admissible depth are necessarily unchanged.
    std::size_t start = 0;
    while (start < order_.size() && depths_[order_[start]].empty()) choice_[order_[start++]] = kUnchanged;
    if (start < order_.size() && descend(start, 0)) {
      verdict.efficient = false;
      verdict.certificate = std::move(found_);
    }
    verdict.systems_solved = counter_;
    return verdict;
  }

 private:
  bool descend(std::size_t depth, std::size_t witnesses) {
    const std::size_t agent = order_[depth];
    const bool last = depth + 1 == order_.size();
    std::vector<std::size_t> options = depths_[agent];
    if (!(last && witnesses == 0)) options.push_back(kUnchanged);
    for (auto opt : options) {
      choice_[agent] = opt;
      const std::size_t w = witnesses + (opt == kUnchanged ? 0 : 1);
      std::optional<InefficiencyCertificate> cert;
      bool feasible = true;
      if (w > 0) {
        cert = solve_witness_system(allocation_, profile_, choice_, counter_);
        feasible = cert.has_value();
      }
      if (feasible) {
        if (last) {
          found_ = std::move(cert);
          return true;
        }
        if (descend(depth + 1, w)) return true;
      }
    }
    choice_[agent] = kUnassigned;
    return false;
  }

  const Allocation& allocation_;
  const Profile& profile_;
  std::vector<std::vector<std::size_t>> depths_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> choice_;
  std::optional<InefficiencyCertificate> found_;
  std::uint64_t counter_ = 0;
};

UnambiguousVerdict exhaustive_search(const Allocation& allocation, const Profile& profile) {
  const std::size_t n = allocation.size();
  UnambiguousVerdict verdict;
  // digit 0 = Unchanged, digit k = depth k; agent 0 most significant
  std::vector<std::size_t> digits(n, 0);
  for (;;) {
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++digits[k] < n) break;
      digits[k] = 0;
      if (k == 0) {
        return verdict;
      }
    }
    std::vector<std::size_t> choice(n);
    for (std::size_t i = 0; i < n; ++i) choice[i] = digits[i] == 0 ? kUnchanged : digits[i];
    if (auto cert = solve_witness_system(allocation, profile, choice, verdict.systems_solved)) {
      verdict.efficient = false;
      verdict.certificate = std::move(cert);
      return verdict;
    }
  }
}

Rat max_step(const Allocation& allocation, const RatMatrix& shift) {
  Rat t = 1;
  const std::size_t n = allocation.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < n; ++a) {
      if (sgn(shift(i, a)) < 0) t = std::min(t, Rat(allocation(i, a) / -shift(i, a)));
    }
  }
  return t;
}

Allocation step(const Allocation& allocation, const RatMatrix& shift, const Rat& t) {
  return validate_allocation(allocation.matrix() + t * shift);
}

}  // namespace

void validate_certificate(const InefficiencyCertificate& cert, const Allocation& allocation, const Profile& profile) {
  require_same_size(allocation, profile);
  const std::size_t n = allocation.size();
  const auto& eta = cert.shift;
  if (eta.rows() != n || eta.cols() != n || cert.witnesses.size() != n) {
    throw Error(Errc::InvalidCertificate, "certificate dimensions do not match the allocation");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (sgn(eta.row_sum(i)) != 0) throw Error(Errc::InvalidCertificate, "shift row " + std::to_string(i) + " does not sum to 0");
    if (sgn(eta.column_sum(i)) != 0) throw Error(Errc::InvalidCertificate, "shift column " + std::to_string(i) + " does not sum to 0");
    for (std::size_t a = 0; a < n; ++a) {
      if (sgn(allocation(i, a)) == 0 && sgn(eta(i, a)) < 0) {
        throw Error(Errc::InvalidCertificate, "shift removes mass the agent does not hold at (" + std::to_string(i) + "," + std::to_string(a) + ")");
      }
    }
  }
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& w = cert.witnesses[i];
    if (!w) {
      for (std::size_t a = 0; a < n; ++a) {
        if (sgn(eta(i, a)) != 0) throw Error(Errc::InvalidCertificate, "agent " + std::to_string(i) + " is marked unchanged but shifted");
      }
      continue;
    }
    any = true;
    if (*w < 1 || *w >= n) throw Error(Errc::InvalidCertificate, "witness depth out of range");
    if (sgn(cumulative_prefix(eta.row(i), profile[i])[*w - 1]) <= 0) {
      throw Error(Errc::InvalidCertificate, "agent " + std::to_string(i) + " has no gain at its witness depth");
    }
  }
  if (!any) throw Error(Errc::InvalidCertificate, "no agent is witnessed");
}

AmbiguousVerdict is_ambiguously_efficient(const Allocation& allocation, const Profile& profile) {
  require_same_size(allocation, profile);
  const std::size_t n = allocation.size();
  lp::LinearProgram program(n * n);
  program.objective = zeros(n * n);
  std::vector<Rat> total_gain = zeros(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Rat> row = zeros(n * n);
    std::vector<Rat> col = zeros(n * n);
    for (std::size_t a = 0; a < n; ++a) {
      if (sgn(allocation(i, a)) == 0) program.set_nonnegative(i * n + a);
      row[i * n + a] = 1;
      col[a * n + i] = 1;
    }
    program.add(std::move(row), lp::Relation::Equal, 0);
    program.add(std::move(col), lp::Relation::Equal, 0);
    std::vector<Rat> prefix = zeros(n * n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      prefix[i * n + profile[i].object_at(k)] = 1;
      program.add(prefix, lp::Relation::GreaterEq, 0);
      for (std::size_t v = 0; v < n * n; ++v) total_gain[v] += prefix[v];
    }
  }
  program.objective = total_gain;
  // The feasible set is a cone; capping the gain keeps the LP bounded.
  program.add(total_gain, lp::Relation::LessEq, 1);
  const auto sol = lp::solve(program);
  AmbiguousVerdict verdict;
  verdict.shift = RatMatrix(n, n);
  if (sol.status != lp::Status::Optimal || sgn(sol.value) == 0) return verdict;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < n; ++a) verdict.shift(i, a) = sol.point[i * n + a];
  }
  verdict.efficient = false;
  verdict.dominating = step(allocation, verdict.shift, max_step(allocation, verdict.shift));
  return verdict;
}

UnambiguousVerdict is_unambiguously_efficient(const Allocation& allocation, const Profile& profile, WitnessSearch search) {
  require_same_size(allocation, profile);
  if (search == WitnessSearch::Exhaustive) return exhaustive_search(allocation, profile);
  return PrunedSearch(allocation, profile).run();
}

UnambiguousVerdict UnambiguousChecker::check(const Allocation& allocation, const Profile& profile) {
  require_same_size(allocation, profile);
  Key key{allocation.support(), {}};
  for (const auto& p : profile) key.second.push_back(p.ranking());
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  auto verdict = is_unambiguously_efficient(allocation, profile);
  std::lock_guard lock(mutex_);
  cache_.emplace(std::move(key), verdict);
  return verdict;
}

std::size_t UnambiguousChecker::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

std::uint64_t UnambiguousChecker::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::vector<std::pair<AgentIndex, AgentIndex>> check_support_bound(const Allocation& allocation) {
  const std::size_t n = allocation.size();
  std::vector<std::pair<AgentIndex, AgentIndex>> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::size_t shared = 0;
      for (std::size_t a = 0; a < n; ++a) shared += (sgn(allocation(i, a)) > 0 && sgn(allocation(j, a)) > 0) ? 1 : 0;
      if (shared >= 3) out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<GapViolation> check_no_gaps(const Allocation& allocation, const Profile& profile) {
  require_same_size(allocation, profile);
  const std::size_t n = allocation.size();
  std::vector<GapViolation> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pi = profile[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& pj = profile[j];
      for (std::size_t pa = 0; pa < n; ++pa) {
        const auto a = pi.object_at(pa);
        if (sgn(allocation(i, a)) <= 0) continue;
        for (std::size_t pb = pa + 1; pb < n; ++pb) {
          const auto b = pi.object_at(pb);
          if (sgn(allocation(j, b)) <= 0 || !pj.prefers(a, b)) continue;
          for (std::size_t pc = pb + 1; pc < n; ++pc) {
            const auto c = pi.object_at(pc);
            if (sgn(allocation(i, c)) > 0 && pj.prefers(b, c)) out.push_back({i, j, a, b, c});
          }
        }
      }
    }
  }
  return out;
}

ProbeResult support_invariance_probe(const Allocation& allocation, const Profile& profile, std::size_t trials, std::uint64_t seed) {
  ProbeResult result;
  result.base_efficient = is_unambiguously_efficient(allocation, profile).efficient;
  if (!result.base_efficient) return result;
  const auto terms = decompose(allocation).terms;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> weight(0, 8);
  const std::size_t n = allocation.size();
  for (std::size_t t = 0; t < trials; ++t) {
    RatMatrix m(n, n);
    std::vector<int> w(terms.size());
    int total = 0;
    while (total == 0) {
      for (auto& x : w) total += (x = weight(rng));
    }
    for (std::size_t k = 0; k < terms.size(); ++k) {
      for (std::size_t i = 0; i < n; ++i) m(i, terms[k].assignment[i]) += ratio(static_cast<long>(w[k]), static_cast<long>(total));
    }
    auto candidate = validate_allocation(std::move(m));
    ++result.trials_run;
    if (!is_unambiguously_efficient(candidate, profile).efficient) {
      result.counterexample = std::move(candidate);
      return result;
    }
  }
  result.passed = true;
  return result;
}

bool is_consistent(const VnmUtility& utility, const Preference& pref) {
  if (utility.size() != pref.size()) return false;
  for (std::size_t p = 0; p + 1 < pref.size(); ++p) {
    if (!(utility[pref.object_at(p)] > utility[pref.object_at(p + 1)])) return false;
  }
  return true;
}

FalsifyingUtilities falsifying_utilities(const InefficiencyCertificate& cert, const Allocation& allocation, const Profile& profile) {
  validate_certificate(cert, allocation, profile);
  const std::size_t n = allocation.size();
  const Rat t = max_step(allocation, cert.shift);
  FalsifyingUtilities out{{}, t, step(allocation, cert.shift, t)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pref = profile[i];
    VnmUtility u(n);
    const auto gains = cumulative_prefix(cert.shift.row(i), pref);
    const auto pivot = std::find_if(gains.begin(), gains.end(), [](const Rat& g) { return sgn(g) > 0; });
    if (pivot == gains.end()) {
      for (std::size_t p = 0; p < n; ++p) u[pref.object_at(p)] = Rat(static_cast<long>(n - p));
      out.utilities.push_back(std::move(u));
      continue;
    }
    const std::size_t p1 = static_cast<std::size_t>(pivot - gains.begin());
    const Rat eps = t * *pivot / 2;  // (m' - m) / 2 with Delta = 1
    for (std::size_t q = 0; q < p1; ++q) u[pref.object_at(q)] = 1 + eps * Rat(static_cast<long>(p1 - q), static_cast<long>(p1 + 1));
    u[pref.object_at(p1)] = 1;
    u[pref.object_at(p1 + 1)] = eps;
    for (std::size_t q = p1 + 2; q < n; ++q) u[pref.object_at(q)] = eps * Rat(static_cast<long>(n - q), static_cast<long>(n - p1 - 1));
    out.utilities.push_back(std::move(u));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Rat before = dot(out.utilities[i], allocation.row(i));
    const Rat after = dot(out.utilities[i], out.improved.row(i));
    const bool shifted = std::any_of(cert.shift.row(i).begin(), cert.shift.row(i).end(), [](const Rat& v) { return sgn(v) != 0; });
    if (shifted ? !(after > before) : after != before) {
      throw Error(Errc::InvalidCertificate, "constructed utility fails to rank the shift for agent " + std::to_string(i));
    }
  }
  return out;
}

ParetoVerdict is_pareto_efficient_at(const Allocation& allocation, const std::vector<VnmUtility>& utilities) {
  const std::size_t n = allocation.size();
  if (utilities.size() != n) throw Error(Errc::DimensionMismatch, "one utility per agent required");
  lp::LinearProgram program(n * n);
  program.objective = zeros(n * n);
  Rat base = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (utilities[i].size() != n) throw Error(Errc::DimensionMismatch, "utility of agent " + std::to_string(i) + " has wrong length");
    std::vector<Rat> row = zeros(n * n);
    std::vector<Rat> col = zeros(n * n);
    std::vector<Rat> welfare = zeros(n * n);
    for (std::size_t a = 0; a < n; ++a) {
      program.set_nonnegative(i * n + a);
      row[i * n + a] = 1;
      col[a * n + i] = 1;
      welfare[i * n + a] = utilities[i][a];
      program.objective[i * n + a] = utilities[i][a];
    }
    program.add(std::move(row), lp::Relation::Equal, 1);
    program.add(std::move(col), lp::Relation::Equal, 1);
    const Rat current = dot(utilities[i], allocation.row(i));
    base += current;
    program.add(std::move(welfare), lp::Relation::GreaterEq, current);
  }
  const auto sol = lp::solve(program);
  ParetoVerdict verdict;
  if (sol.status != lp::Status::Optimal || sol.value == base) return verdict;
  RatMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < n; ++a) m(i, a) = sol.point[i * n + a];
  }
  verdict.efficient = false;
  verdict.improvement = validate_allocation(std::move(m));
  return verdict;
}

VnmUtility sample_consistent_vnm(const Preference& pref, std::mt19937_64& rng) {
  constexpr long kGrid = 1'000'000;
  std::uniform_int_distribution<long> draw(1, kGrid);
  std::vector<long> values;
  while (values.size() < pref.size()) {
    const long v = draw(rng);
    if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  VnmUtility u(pref.size());
  for (std::size_t p = 0; p < pref.size(); ++p) u[pref.object_at(p)] = ratio(values[p], kGrid);
  return u;
}

}  // namespace ordalloc
