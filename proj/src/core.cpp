#include "ordalloc/core.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace ordalloc {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::NonSquare: return "NonSquare";
    case Errc::TooSmall: return "TooSmall";
    case Errc::RowSumViolation: return "RowSumViolation";
    case Errc::ColumnSumViolation: return "ColumnSumViolation";
    case Errc::RangeViolation: return "RangeViolation";
    case Errc::InvalidPreference: return "InvalidPreference";
    case Errc::InvalidPermutation: return "InvalidPermutation";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::MalformedProgram: return "MalformedProgram";
    case Errc::InvalidCertificate: return "InvalidCertificate";
    case Errc::InsufficientSupply: return "InsufficientSupply";
    case Errc::InfeasiblePartial: return "InfeasiblePartial";
    case Errc::RuleNamesAllocatedAgent: return "RuleNamesAllocatedAgent";
    case Errc::DiarchyOnFractionalResidual: return "DiarchyOnFractionalResidual";
    case Errc::InvalidDirective: return "InvalidDirective";
    case Errc::RuleExhausted: return "RuleExhausted";
    case Errc::ResidualInvariantBroken: return "ResidualInvariantBroken";
    case Errc::BlockNotAdjacentInBase: return "BlockNotAdjacentInBase";
    case Errc::InvalidOrderLottery: return "InvalidOrderLottery";
    case Errc::ModeUnsupported: return "ModeUnsupported";
    case Errc::DegenerateDenominator: return "DegenerateDenominator";
    case Errc::InadmissibleEpsilon: return "InadmissibleEpsilon";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

void check_permutation(std::span<const std::size_t> perm, std::size_t n) {
  if (perm.size() != n) {
    throw Error(Errc::InvalidPermutation, "expected " + std::to_string(n) + " entries, got " + std::to_string(perm.size()));
  }
  std::vector<bool> seen(n, false);
  for (auto v : perm) {
    if (v >= n || seen[v]) throw Error(Errc::InvalidPermutation, "entry " + std::to_string(v) + " repeated or out of range");
    seen[v] = true;
  }
}

Preference::Preference(std::vector<ObjectIndex> ranking) : ranking_(std::move(ranking)), position_(ranking_.size()) {
  try {
    check_permutation(ranking_, ranking_.size());
  } catch (const Error& e) {
    throw Error(Errc::InvalidPreference, e.detail());
  }
  for (std::size_t p = 0; p < ranking_.size(); ++p) position_[ranking_[p]] = p;
}

Preference Preference::identity(std::size_t size) {
  std::vector<ObjectIndex> ranking(size);
  std::iota(ranking.begin(), ranking.end(), ObjectIndex{0});
  return Preference(std::move(ranking));
}

Profile::Profile(std::vector<Preference> prefs) : prefs_(std::move(prefs)) {
  if (prefs_.size() < kMinSize) {
    throw Error(Errc::TooSmall, "profiles need at least " + std::to_string(kMinSize) + " agents");
  }
  for (std::size_t i = 0; i < prefs_.size(); ++i) {
    if (prefs_[i].size() != prefs_.size()) {
      throw Error(Errc::DimensionMismatch, "agent " + std::to_string(i) + " ranks " + std::to_string(prefs_[i].size()) +
                                               " objects but there are " + std::to_string(prefs_.size()) + " agents");
    }
  }
}

Profile Profile::with(AgentIndex agent, Preference pref) const {
  Profile copy = *this;
  if (pref.size() != size()) throw Error(Errc::DimensionMismatch, "replacement preference has wrong size");
  copy.prefs_.at(agent) = std::move(pref);
  return copy;
}

RatMatrix::RatMatrix(const std::vector<std::vector<Rat>>& rows) : rows_(rows.size()), cols_(rows.empty() ? 0 : rows.front().size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(Errc::NonSquare, "ragged matrix");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Rat RatMatrix::row_sum(std::size_t r) const { return sum(row(r)); }

Rat RatMatrix::column_sum(std::size_t c) const {
  Rat total = 0;
  for (std::size_t r = 0; r < rows_; ++r) total += (*this)(r, c);
  return total;
}

RatMatrix& RatMatrix::operator+=(const RatMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw Error(Errc::DimensionMismatch, "matrix sum");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

RatMatrix& RatMatrix::operator-=(const RatMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw Error(Errc::DimensionMismatch, "matrix difference");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

RatMatrix& RatMatrix::operator*=(const Rat& factor) {
  for (auto& v : data_) v *= factor;
  return *this;
}

Lottery Allocation::lottery(AgentIndex agent) const {
  auto r = row(agent);
  return Lottery(r.begin(), r.end());
}

std::vector<bool> Allocation::support() const {
  std::vector<bool> out(size() * size());
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t a = 0; a < size(); ++a) out[i * size() + a] = sgn(matrix_(i, a)) > 0;
  }
  return out;
}

Allocation validate_allocation(RatMatrix matrix) {
  const std::size_t n = matrix.rows();
  if (matrix.cols() != n) {
    throw Error(Errc::NonSquare, std::to_string(n) + "x" + std::to_string(matrix.cols()) + " matrix");
  }
  if (n < kMinSize) throw Error(Errc::TooSmall, "allocations need n >= " + std::to_string(kMinSize));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < n; ++a) {
      const Rat& v = matrix(i, a);
      if (sgn(v) < 0 || v > 1) {
        throw Error(Errc::RangeViolation, "entry (" + std::to_string(i) + "," + std::to_string(a) + ") = " + to_string(v));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (matrix.row_sum(i) != 1) throw Error(Errc::RowSumViolation, "row " + std::to_string(i) + " sums to " + to_string(matrix.row_sum(i)));
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (matrix.column_sum(a) != 1) {
      throw Error(Errc::ColumnSumViolation, "column " + std::to_string(a) + " sums to " + to_string(matrix.column_sum(a)));
    }
  }
  return Allocation(std::move(matrix));
}

Allocation validate_allocation(const std::vector<std::vector<Rat>>& rows) {
  for (const auto& r : rows) {
    if (r.size() != rows.size()) throw Error(Errc::NonSquare, "row length differs from row count");
  }
  return validate_allocation(RatMatrix(rows));
}

Allocation permutation_allocation(std::span<const ObjectIndex> assignment) {
  check_permutation(assignment, assignment.size());
  RatMatrix m(assignment.size(), assignment.size());
  for (std::size_t i = 0; i < assignment.size(); ++i) m(i, assignment[i]) = 1;
  return validate_allocation(std::move(m));
}

std::uint64_t profile_count(std::size_t n) {
  std::uint64_t fact = 1;
  for (std::size_t k = 2; k <= n; ++k) fact *= k;
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= fact;
  return total;
}

std::vector<std::size_t> permutation_from_rank(std::size_t n, std::uint64_t rank) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<std::uint64_t> fact(n + 1, 1);
  for (std::size_t k = 1; k <= n; ++k) fact[k] = fact[k - 1] * k;
  std::vector<std::size_t> perm;
  perm.reserve(n);
  for (std::size_t k = n; k > 0; --k) {
    const std::uint64_t idx = rank / fact[k - 1];
    rank %= fact[k - 1];
    perm.push_back(pool[idx]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  return perm;
}

std::uint64_t rank_of_permutation(std::span<const std::size_t> perm) {
  const std::size_t n = perm.size();
  std::uint64_t rank = 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::uint64_t smaller = 0;
    for (std::size_t j = k + 1; j < n; ++j) smaller += perm[j] < perm[k] ? 1 : 0;
    std::uint64_t fact = 1;
    for (std::size_t f = 2; f < n - k; ++f) fact *= f;
    rank += smaller * fact;
  }
  return rank;
}

Profile profile_at(std::size_t n, std::uint64_t index) {
  std::uint64_t fact = 1;
  for (std::size_t k = 2; k <= n; ++k) fact *= k;
  std::vector<Preference> prefs(n);
  for (std::size_t agent = n; agent-- > 0;) {
    prefs[agent] = Preference(permutation_from_rank(n, index % fact));
    index /= fact;
  }
  return Profile(std::move(prefs));
}

ProfileEnumerator::ProfileEnumerator(std::size_t n) : n_(n), total_(profile_count(n)), ranks_(n, 0) {
  if (n < kMinSize) throw Error(Errc::TooSmall, "profile enumeration needs n >= 3");
  std::uint64_t fact = 1;
  for (std::size_t k = 2; k <= n; ++k) fact *= k;
  all_prefs_.reserve(fact);
  for (std::uint64_t r = 0; r < fact; ++r) all_prefs_.emplace_back(permutation_from_rank(n, r));
}

std::optional<Profile> ProfileEnumerator::next() {
  if (done_) return std::nullopt;
  std::vector<Preference> prefs;
  prefs.reserve(n_);
  for (auto r : ranks_) prefs.push_back(all_prefs_[r]);
  // odometer increment, last agent least significant
  std::size_t k = n_;
  while (k > 0) {
    --k;
    if (++ranks_[k] < all_prefs_.size()) break;
    ranks_[k] = 0;
    if (k == 0) done_ = true;
  }
  return Profile(std::move(prefs));
}

Preference apply_object_permutation(const Preference& pref, std::span<const ObjectIndex> rho) {
  check_permutation(rho, pref.size());
  std::vector<ObjectIndex> ranking;
  ranking.reserve(pref.size());
  for (auto a : pref.ranking()) ranking.push_back(rho[a]);
  return Preference(std::move(ranking));
}

Profile apply_object_permutation(const Profile& profile, std::span<const ObjectIndex> rho) {
  std::vector<Preference> prefs;
  prefs.reserve(profile.size());
  for (const auto& p : profile) prefs.push_back(apply_object_permutation(p, rho));
  return Profile(std::move(prefs));
}

std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> perm) {
  check_permutation(perm, perm.size());
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = k;
  return inv;
}

}  // namespace ordalloc
