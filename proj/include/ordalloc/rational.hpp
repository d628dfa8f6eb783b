#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ordalloc {

/// Exact rational number. Arithmetic results are canonical (reduced, positive
/// denominator), so equality is structural; build fractions with ratio().
using Rat = mpq_class;

/// Parses "p/q", "p" or "-p/q". Throws Error{ParseError} on anything else,
/// including a zero denominator.
Rat parse_rat(std::string_view text);

/// Canonical text form: "p/q", or "p" when the denominator is 1.
std::string to_string(const Rat& value);

/// num/den in canonical form. Prefer this to Rat(num, den), which gmpxx
/// does not reduce.
inline Rat ratio(long num, long den) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline bool is_integral(const Rat& value) { return value.get_den() == 1; }

Rat sum(std::span<const Rat> values);

/// Dot product of two equally sized vectors.
Rat dot(std::span<const Rat> lhs, std::span<const Rat> rhs);

std::vector<Rat> zeros(std::size_t count);

}  // namespace ordalloc
