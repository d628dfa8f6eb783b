#include "ordalloc/welfare.hpp"

#include <algorithm>
#include <string>

namespace ordalloc {

namespace {

Rat count(std::size_t v) { return Rat(static_cast<long>(v)); }

}  // namespace

Rat exchange_rate(std::size_t k, std::size_t n, const Rat& epsilon) {
  if (k < 3 || k > n) throw Error(Errc::DimensionMismatch, "trade object index " + std::to_string(k) + " outside 3.." + std::to_string(n));
  const Rat denominator = 1 - count(n - k) * epsilon;
  if (sgn(denominator) <= 0) throw Error(Errc::DegenerateDenominator, "1 - (n-k)e = " + to_string(denominator));
  return count(k - 2) * epsilon / denominator;
}

std::vector<Rat> trader_utility(std::size_t n, const Rat& epsilon) {
  auto u = partner_utility(n, epsilon);
  u[1] = 1 - epsilon;
  return u;
}

std::vector<Rat> partner_utility(std::size_t n, const Rat& epsilon) {
  std::vector<Rat> u(n);
  u[0] = 1;
  for (std::size_t l = 1; l < n; ++l) u[l] = count(n - 1 - l) * epsilon;
  return u;
}

SymmetryCostReport symmetry_cost(std::size_t n, const Rat& epsilon) {
  if (n < kMinSize) throw Error(Errc::TooSmall, "the construction needs n >= 3");
  if (sgn(epsilon) <= 0) throw Error(Errc::InadmissibleEpsilon, "epsilon must be positive");
  const auto u1 = trader_utility(n, epsilon);
  const auto uj = partner_utility(n, epsilon);
  if (!(uj[1] < 1) || !(u1[1] > u1[std::min<std::size_t>(2, n - 1)])) {
    throw Error(Errc::InadmissibleEpsilon, "utilities do not follow the common ranking at e = " + to_string(epsilon));
  }
  SymmetryCostReport r{n, epsilon, {}, permutation_allocation(std::vector<ObjectIndex>{0, 1, 2}), {}, {}, {}, {}, {}};
  Rat total_rate = 0;
  for (std::size_t k = 3; k <= n; ++k) {
    Rat mu;
    try {
      mu = exchange_rate(k, n, epsilon);
    } catch (const Error& e) {
      throw Error(Errc::InadmissibleEpsilon, e.detail());
    }
    if (sgn(mu) <= 0 || mu >= 1) throw Error(Errc::InadmissibleEpsilon, "rate for a_" + std::to_string(k) + " is " + to_string(mu));
    const Rat per_unit = -mu + (1 - epsilon) - (1 - mu) * count(n - k) * epsilon;
    if (sgn(per_unit) <= 0) throw Error(Errc::InadmissibleEpsilon, "agent 1 does not gain from trading a_" + std::to_string(k));
    total_rate += mu;
    r.rates.push_back(std::move(mu));
  }
  if (total_rate > 1) throw Error(Errc::InadmissibleEpsilon, "agent 1 lacks the a_1 to pay for every trade");

  const Rat share(1, static_cast<long>(n));
  RatMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < n; ++a) m(i, a) = share;
  }
  // partner with index k - 1 trades object a_k (index k - 1)
  for (std::size_t k = 3; k <= n; ++k) {
    const std::size_t partner = k - 1;
    const Rat& mu = r.rates[k - 3];
    m(partner, 1) -= share;
    m(0, 1) += share;
    m(partner, 0) += mu * share;
    m(0, 0) -= mu * share;
    m(partner, k - 1) += (1 - mu) * share;
    m(0, k - 1) -= (1 - mu) * share;
  }
  r.traded = validate_allocation(std::move(m));
  r.trader_lottery = r.traded.lottery(0);
  const Rat before = sum(std::vector<Rat>(u1.begin(), u1.end())) * share;
  const Rat after = dot(u1, r.trader_lottery);
  r.gain = after - before;
  r.delta = std::max(Rat(before - 2 * share), Rat(1 - after));
  r.limit = count(n - 2) * share;
  r.bound = r.limit - 2 * r.delta;
  return r;
}

}  // namespace ordalloc
