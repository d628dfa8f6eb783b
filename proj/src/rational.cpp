#include "ordalloc/rational.hpp"

#include <cctype>

#include "ordalloc/error.hpp"

namespace ordalloc {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rat parse_rat(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  const auto slash = body.find('/');
  const std::string_view num = body.substr(0, slash);
  const std::string_view den = slash == std::string_view::npos ? std::string_view{"1"} : body.substr(slash + 1);
  if (!all_digits(num) || !all_digits(den)) {
    throw Error(Errc::ParseError, "malformed rational '" + std::string(text) + "'");
  }
  mpz_class n(std::string(num), 10);
  mpz_class d(std::string(den), 10);
  if (d == 0) throw Error(Errc::ParseError, "zero denominator in '" + std::string(text) + "'");
  Rat value(n, d);
  value.canonicalize();
  return negative ? Rat(-value) : value;
}

std::string to_string(const Rat& value) { return value.get_str(10); }

Rat sum(std::span<const Rat> values) {
  Rat total = 0;
  for (const auto& v : values) total += v;
  return total;
}

Rat dot(std::span<const Rat> lhs, std::span<const Rat> rhs) {
  if (lhs.size() != rhs.size()) throw Error(Errc::DimensionMismatch, "dot product of unequal lengths");
  Rat total = 0;
  for (std::size_t k = 0; k < lhs.size(); ++k) total += lhs[k] * rhs[k];
  return total;
}

std::vector<Rat> zeros(std::size_t count) { return std::vector<Rat>(count, Rat(0)); }

}  // namespace ordalloc
