#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ordalloc/error.hpp"
#include "ordalloc/rational.hpp"

namespace ordalloc {

using AgentIndex = std::size_t;
using ObjectIndex = std::size_t;

/// A lottery over objects, indexed by ObjectIndex.
using Lottery = std::vector<Rat>;

/// Smallest economy the library accepts; below three objects every question
/// asked here is trivial.
inline constexpr std::size_t kMinSize = 3;

/// Strict ranking of objects, best first.
class Preference {
 public:
  Preference() = default;
  explicit Preference(std::vector<ObjectIndex> ranking);

  static Preference identity(std::size_t size);

  std::size_t size() const noexcept { return ranking_.size(); }
  ObjectIndex object_at(std::size_t position) const { return ranking_.at(position); }
  std::size_t position_of(ObjectIndex object) const { return position_.at(object); }
  ObjectIndex top() const { return ranking_.front(); }
  bool prefers(ObjectIndex a, ObjectIndex b) const { return position_of(a) < position_of(b); }
  const std::vector<ObjectIndex>& ranking() const noexcept { return ranking_; }

  friend bool operator==(const Preference& lhs, const Preference& rhs) { return lhs.ranking_ == rhs.ranking_; }
  friend auto operator<=>(const Preference& lhs, const Preference& rhs) { return lhs.ranking_ <=> rhs.ranking_; }

 private:
  std::vector<ObjectIndex> ranking_;
  std::vector<std::size_t> position_;
};

/// One preference per agent; |N| = |A| = n >= 3.
class Profile {
 public:
  Profile() = default;
  explicit Profile(std::vector<Preference> prefs);

  std::size_t size() const noexcept { return prefs_.size(); }
  const Preference& operator[](AgentIndex agent) const { return prefs_.at(agent); }
  const std::vector<Preference>& preferences() const noexcept { return prefs_; }

  /// Copy of this profile with one agent's report replaced.
  Profile with(AgentIndex agent, Preference pref) const;

  auto begin() const { return prefs_.begin(); }
  auto end() const { return prefs_.end(); }

  friend bool operator==(const Profile&, const Profile&) = default;
  friend auto operator<=>(const Profile& lhs, const Profile& rhs) { return lhs.prefs_ <=> rhs.prefs_; }

 private:
  std::vector<Preference> prefs_;
};

/// Dense row-major matrix of exact rationals.
class RatMatrix {
 public:
  RatMatrix() = default;
  RatMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Rat(0)) {}
  explicit RatMatrix(const std::vector<std::vector<Rat>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Rat& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rat& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Rat> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Rat> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Rat row_sum(std::size_t r) const;
  Rat column_sum(std::size_t c) const;

  RatMatrix& operator+=(const RatMatrix& other);
  RatMatrix& operator-=(const RatMatrix& other);
  RatMatrix& operator*=(const Rat& factor);

  friend RatMatrix operator+(RatMatrix lhs, const RatMatrix& rhs) { return lhs += rhs; }
  friend RatMatrix operator-(RatMatrix lhs, const RatMatrix& rhs) { return lhs -= rhs; }
  friend RatMatrix operator*(const Rat& factor, RatMatrix m) { return m *= factor; }

  friend bool operator==(const RatMatrix&, const RatMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rat> data_;
};

/// Bistochastic matrix: row i is agent i's lottery, every column sums to 1.
/// Only obtainable through validate_allocation, so every instance is valid.
class Allocation {
 public:
  std::size_t size() const noexcept { return matrix_.rows(); }
  const Rat& operator()(AgentIndex agent, ObjectIndex object) const { return matrix_(agent, object); }
  std::span<const Rat> row(AgentIndex agent) const { return matrix_.row(agent); }
  Lottery lottery(AgentIndex agent) const;
  const RatMatrix& matrix() const noexcept { return matrix_; }

  /// Support pattern, row-major, one flag per (agent, object).
  std::vector<bool> support() const;

  friend bool operator==(const Allocation&, const Allocation&) = default;

 private:
  friend Allocation validate_allocation(RatMatrix matrix);
  explicit Allocation(RatMatrix matrix) : matrix_(std::move(matrix)) {}
  RatMatrix matrix_;
};

/// Errors: NonSquare, TooSmall, RangeViolation, RowSumViolation, ColumnSumViolation.
Allocation validate_allocation(RatMatrix matrix);
Allocation validate_allocation(const std::vector<std::vector<Rat>>& rows);

/// Identity-like deterministic allocation: agent i receives assignment[i].
Allocation permutation_allocation(std::span<const ObjectIndex> assignment);

/// (n!)^n.
std::uint64_t profile_count(std::size_t n);

/// The permutation of {0..n-1} with the given lexicographic rank.
std::vector<std::size_t> permutation_from_rank(std::size_t n, std::uint64_t rank);
std::uint64_t rank_of_permutation(std::span<const std::size_t> perm);

/// Profile number `index` in the enumeration order of ProfileEnumerator.
Profile profile_at(std::size_t n, std::uint64_t index);

/// Yields every profile of size n exactly once, ordered lexicographically by
/// the tuple of per-agent permutation ranks (agent 0 most significant).
class ProfileEnumerator {
 public:
  explicit ProfileEnumerator(std::size_t n);

  std::optional<Profile> next();
  std::uint64_t total() const noexcept { return total_; }

 private:
  std::size_t n_;
  std::uint64_t total_;
  std::vector<std::uint64_t> ranks_;
  std::vector<Preference> all_prefs_;
  bool done_ = false;
};

/// Throws InvalidPermutation unless perm is a bijection on {0..n-1}.
void check_permutation(std::span<const std::size_t> perm, std::size_t n);

/// Replaces every object a by rho[a], keeping the order of each ranking.
Preference apply_object_permutation(const Preference& pref, std::span<const ObjectIndex> rho);
Profile apply_object_permutation(const Profile& profile, std::span<const ObjectIndex> rho);

std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> perm);

}  // namespace ordalloc
