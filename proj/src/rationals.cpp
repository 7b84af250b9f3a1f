#include "dcl/rationals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dcl/error.hpp"

namespace dcl {

namespace {

using i128 = __int128;

std::int64_t iabs(std::int64_t v) { return v < 0 ? -v : v; }

// Rounding guard for floor(j * eps): j * eps may land a hair below an integer.
int guarded_floor(double x) { return static_cast<int>(std::floor(x + 1e-12)); }

// Integer range [ceil(lo), floor(hi)] for long double bounds.
std::pair<std::int64_t, std::int64_t> int_range(long double lo, long double hi) {
  return {static_cast<std::int64_t>(std::ceil(lo)), static_cast<std::int64_t>(std::floor(hi))};
}

}  // namespace

std::strong_ordering ReducedRational::operator<=>(const ReducedRational& o) const {
  const i128 lhs = static_cast<i128>(num) * o.den;
  const i128 rhs = static_cast<i128>(o.num) * den;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string ReducedRational::str() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

ReducedRational reduce(std::int64_t num, std::int64_t den) {
  if (den == 0) throw DomainError("reduce: zero denominator");
  if (num == 0) return {0, 1};
  const std::int64_t g = std::gcd(num, den);
  num /= g;
  den /= g;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  return {num, den};
}

ArcPair ArcPair::make(std::int64_t a, std::vector<std::int64_t> b, std::int64_t q) {
  if (q < 1) throw DomainError("ArcPair: q must be positive");
  ArcPair p;
  p.q = q;
  p.a = a % q < 0 ? a % q + q : a % q;
  p.b = std::move(b);
  std::int64_t g = std::gcd(p.a, q);
  for (auto& bk : p.b) {
    bk %= q;
    if (bk < 0) bk += q;
    g = std::gcd(g, bk);
  }
  if (g != 1) throw DomainError("ArcPair: gcd(a, b, q) != 1");
  return p;
}

std::vector<ReducedRational> ArcPair::beta() const {
  std::vector<ReducedRational> out;
  out.reserve(b.size());
  for (auto bk : b) out.push_back(reduce(bk, q));
  return out;
}

std::string ArcPair::str() const {
  std::ostringstream os;
  os << "(a=" << a << ", b=(";
  for (std::size_t k = 0; k < b.size(); ++k) os << (k ? "," : "") << b[k];
  os << "), q=" << q << ")";
  return os.str();
}

void ArcParams::validate() const {
  if (!(eps1 > 0.0)) throw ConfigError("eps1 must be positive");
  if (!(eps1 < eps2)) throw ConfigError("eps1 must be smaller than eps2");
  if (!(eps2 < 1.0)) throw ConfigError("eps2 must be smaller than 1");
  if (d < 1) throw ConfigError("d must be at least 1");
  if (n < 1) throw ConfigError("n must be at least 1");
}

int ArcParams::floor_eps1(int j) const { return guarded_floor(j * eps1); }
int ArcParams::floor_eps2(int j) const { return guarded_floor(j * eps2); }

double ArcParams::xj_radius(int j) const { return std::exp2(-2.0 * d * j + eps1 * j); }
double ArcParams::mj_lambda_radius(int j) const { return std::exp2(-2.0 * d * j + eps2 * j); }
double ArcParams::mj_xi_radius(int j) const { return std::exp2(-1.0 * j + eps2 * j); }

long double periodic_offset(long double x, const ReducedRational& r) {
  const long double diff = x - r.value_ld();
  return diff - std::nearbyintl(diff);
}

ReducedRational dirichlet_approx(double x, std::int64_t Q) {
  if (Q < 1) throw DomainError("dirichlet_approx: Q must be positive");
  if (!std::isfinite(x)) throw DomainError("dirichlet_approx: non-finite input");
  const double ipart = std::floor(x);
  if (std::abs(ipart) > 0x1p52) throw DomainError("dirichlet_approx: |x| too large");
  const double frac = x - ipart;  // exact
  const auto k0 = static_cast<std::int64_t>(ipart);
  const long double inv_q = 1.0L / static_cast<long double>(Q);

  // q = 1 first: the nearest integer, floor on an exact half.
  const long double dist0 = std::min<long double>(frac, 1.0L - frac);
  if (dist0 <= inv_q) {
    return {k0 + (frac > 0.5 ? 1 : 0), 1};
  }

  // Here frac > 1/Q >= 2^-63, so frac = M / D with D <= 2^116 exactly.
  int e = 0;
  const double mant = std::frexp(frac, &e);  // frac = mant * 2^e, mant in [0.5, 1)
  const auto M = static_cast<i128>(std::ldexp(mant, 53));
  const int shift = 53 - e;
  const i128 D = static_cast<i128>(1) << shift;
  const i128 limit = D / Q;  // |q x - p| <= 1/Q  <=>  residual numerator <= floor(D / Q)

  // Euclid on (M, D); after step i the residual |q_i frac - p_i| equals z / D.
  i128 y = M, z = D;
  i128 p_prev = 1, q_prev = 0, p_prev2 = 0, q_prev2 = 1;
  for (int i = 0; i < 256; ++i) {
    const i128 a_i = y / z;
    const i128 rem = y - a_i * z;
    const i128 p = a_i * p_prev + p_prev2;
    const i128 q = a_i * q_prev + q_prev2;
    if (q > Q) break;
    if (q > 1 && rem <= limit) {
      // Exact half-way residual: take the smaller numerator.
      // q frac - p = (-1)^i rem / D; on an exact half take the smaller numerator.
      const i128 num = (2 * rem == D && i % 2 == 1) ? p - 1 : p;
      return reduce(static_cast<std::int64_t>(num) + k0 * static_cast<std::int64_t>(q),
                    static_cast<std::int64_t>(q));
    }
    if (rem == 0) break;
    p_prev2 = p_prev;
    q_prev2 = q_prev;
    p_prev = p;
    q_prev = q;
    y = z;
    z = rem;
  }
  throw std::logic_error("dirichlet_approx: no convergent met the Dirichlet bound");
}

std::vector<ReducedRational> farey_set(std::int64_t Q) {
  if (Q < 1) throw DomainError("farey_set: Q must be positive");
  std::vector<ReducedRational> out;
  for (std::int64_t q = 1; q <= Q; ++q) {
    for (std::int64_t a = 0; a < q; ++a) {
      if (std::gcd(a, q) == 1) out.push_back({a, q});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ReducedRational> xj_candidates(double lambda, int j, const ArcParams& params) {
  if (j < 1) throw DomainError("X_j: j must be positive");
  std::vector<ReducedRational> out;
  const int f = params.floor_eps1(j);
  if (f <= 0) return out;  // A_j is empty
  if (f >= 40) throw BudgetError("X_j: denominator range 2^floor(j eps1) too large");
  const std::int64_t q_end = std::int64_t{1} << f;
  const long double w = params.xj_radius(j);
  const long double lam = lambda;
  for (std::int64_t q = 1; q < q_end; ++q) {
    const long double lq = lam * q;
    const long double wq = w * q;
    auto [lo, hi] = int_range(lq - wq, lq + wq);
    for (std::int64_t a = lo; a <= hi; ++a) {
      if (std::gcd(iabs(a), q) != 1) continue;
      if (std::abs(lq - static_cast<long double>(a)) <= wq) out.push_back({a, q});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<ReducedRational> in_Xj(double lambda, int j, const ArcParams& params) {
  auto c = xj_candidates(lambda, j, params);
  if (c.empty()) return std::nullopt;
  return c.front();
}

std::vector<ArcPair> mj_candidates(double lambda, std::span<const double> xi, int j,
                                   const ArcParams& params) {
  if (j < 1) throw DomainError("M_j: j must be positive");
  std::vector<ArcPair> out;
  const int f = params.floor_eps2(j);
  if (f <= 0) return out;
  if (f >= 30) throw BudgetError("M_j: denominator range too large");
  const std::int64_t q_end = std::int64_t{1} << f;
  const long double wl = params.mj_lambda_radius(j);
  const long double wx = params.mj_xi_radius(j);
  const std::size_t n = xi.size();
  for (std::int64_t q = 1; q < q_end; ++q) {
    const long double lq = static_cast<long double>(lambda) * q;
    auto [alo, ahi] = int_range(lq - wl * q, lq + wl * q);
    if (alo > ahi) continue;
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges(n);
    bool empty = false;
    for (std::size_t k = 0; k < n; ++k) {
      const long double xq = static_cast<long double>(xi[k]) * q;
      ranges[k] = int_range(xq - wx * q, xq + wx * q);
      if (ranges[k].first > ranges[k].second) empty = true;
    }
    if (empty) continue;
    for (std::int64_t a = alo; a <= ahi; ++a) {
      if (std::abs(lq - a) > wl * q) continue;
      std::vector<std::int64_t> b(n);
      for (std::size_t k = 0; k < n; ++k) b[k] = ranges[k].first;
      while (true) {
        long double dist2 = 0.0L;
        for (std::size_t k = 0; k < n; ++k) {
          const long double dk = static_cast<long double>(xi[k]) - static_cast<long double>(b[k]) / q;
          dist2 += dk * dk;
        }
        std::int64_t g = std::gcd(iabs(a), q);
        for (auto bk : b) g = std::gcd(g, iabs(bk));
        if (g == 1 && std::sqrt(dist2) <= wx) out.push_back(ArcPair::make(a, b, q));
        std::size_t k = 0;
        for (; k < n; ++k) {
          if (++b[k] <= ranges[k].second) break;
          b[k] = ranges[k].first;
        }
        if (k == n) break;
      }
    }
  }
  return out;
}

std::optional<ArcPair> in_Mj(double lambda, std::span<const double> xi, int j,
                             const ArcParams& params) {
  auto c = mj_candidates(lambda, xi, j, params);
  if (c.empty()) return std::nullopt;
  return c.front();
}

std::vector<ArcPair> enumerate_Rs(int s, int n, std::uint64_t limit) {
  if (s < 1 || n < 1) throw DomainError("enumerate_Rs: s and n must be positive");
  if (s > 30) throw BudgetError("enumerate_Rs: s too large");
  const std::int64_t lo = rs_q_lo(s), hi = rs_q_hi(s);
  long double cost = 0.0L;
  for (std::int64_t q = lo; q < hi; ++q) cost += std::pow(static_cast<long double>(q), n + 1);
  if (cost > static_cast<long double>(limit)) {
    throw BudgetError("enumerate_Rs: " + std::to_string(static_cast<double>(cost)) +
                      " candidates exceed the limit");
  }
  std::vector<ArcPair> out;
  for (std::int64_t q = lo; q < hi; ++q) {
    for (std::int64_t a = 0; a < q; ++a) {
      const std::int64_t ga = std::gcd(a, q);
      std::vector<std::int64_t> b(static_cast<std::size_t>(n), 0);
      while (true) {
        std::int64_t g = ga;
        for (auto bk : b) g = std::gcd(g, bk);
        if (g == 1) {
          ArcPair p;
          p.a = a;
          p.b = b;
          p.q = q;
          out.push_back(std::move(p));
        }
        int k = n - 1;
        for (; k >= 0; --k) {
          if (++b[static_cast<std::size_t>(k)] < q) break;
          b[static_cast<std::size_t>(k)] = 0;
        }
        if (k < 0) break;
      }
    }
  }
  return out;
}

std::uint64_t lcm_range(int s) {
  if (s < 1) throw DomainError("lcm_range: s must be positive");
  if (s > 63) throw OverflowError("lcm_range: range exceeds 64 bits");
  const std::uint64_t lo = std::uint64_t{1} << (s - 1);
  const std::uint64_t hi = std::uint64_t{1} << s;
  unsigned __int128 acc = 1;
  for (std::uint64_t k = lo; k <= hi; ++k) {
    const auto a64 = static_cast<std::uint64_t>(acc);
    const std::uint64_t g = std::gcd(a64, k);
    acc = acc / g * k;
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      throw OverflowError("lcm_range: Q_s exceeds 64 bits for s = " + std::to_string(s));
    }
  }
  return static_cast<std::uint64_t>(acc);
}

std::uint64_t divisor_count(std::uint64_t q) {
  if (q < 1) throw DomainError("divisor_count: q must be positive");
  std::uint64_t count = 1;
  for (std::uint64_t p = 2; p * p <= q; ++p) {
    if (q % p) continue;
    std::uint64_t e = 0;
    while (q % p == 0) {
      q /= p;
      ++e;
    }
    count *= e + 1;
  }
  if (q > 1) count *= 2;
  return count;
}

std::int64_t gcd_all(std::span<const std::int64_t> values) {
  std::int64_t g = 0;
  for (auto v : values) g = std::gcd(g, iabs(v));
  return g;
}

}  // namespace dcl
