#pragma once

// Complete Weyl sums S(a/q, b/q) = q^-n sum_{r in [q]^n} e(a|r|^(2d)/q + b.r/q)
// and region Weyl sums with a smooth cutoff.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dcl/numeric.hpp"
#include "dcl/rationals.hpp"

namespace dcl {

inline constexpr std::uint64_t kDefaultTermBudget = 1'000'000'000;

struct WeylSumResult {
  cplx value;
  std::int64_t q = 1;
  std::uint64_t terms = 0;  // q^n
};

/// |r|^(2d) mod m for an integer vector r; m < 2^31.
std::int64_t norm_power_mod(std::span<const std::int64_t> r, int d, std::int64_t m);

/// S(a/q, b/q) for a canonical pair. d = 1 uses the product of one-dimensional
/// quadratic Gauss sums; otherwise the direct lexicographic sum.
WeylSumResult complete_weyl_sum(const ArcPair& pair, int d, int n,
                                std::uint64_t budget = kDefaultTermBudget);

/// Direct lexicographic sum over [q]^n with compensated accumulation.
WeylSumResult complete_weyl_sum_direct(const ArcPair& pair, int d,
                                       std::uint64_t budget = kDefaultTermBudget);

/// S(a/q, b/q) for every b in [q]^n, flattened row-major (b_1 slowest).
/// Separable transform of r -> e(a|r|^(2d)/q); cost n q^(n+1).
std::vector<cplx> weyl_sum_table(std::int64_t a, std::int64_t q, int d, int n,
                                 std::uint64_t budget = kDefaultTermBudget);

struct OrthogonalityReport {
  std::uint64_t cases = 0;   // canonical pairs with gcd(a, q) > 1
  double max_abs = 0.0;
  std::vector<ArcPair> violations;
};

/// Checks |S| <= tol over every canonical pair with q <= q_max and gcd(a, q) > 1.
OrthogonalityReport verify_orthogonality(std::int64_t q_max, int d, int n, double tol = 1e-9);

struct DecayFit {
  double delta_hat = 0.0;
  std::vector<std::int64_t> q;
  std::vector<double> max_abs;  // M(q) = max over gcd(a, q) = 1 and all b
};

/// Least-squares fit log M(q) = -delta_hat log q over 1 <= q <= q_max.
DecayFit fit_decay_exponent(std::int64_t q_max, int d, int n);

/// One monomial coefficient xi_alpha of P(xi; x) = sum xi_alpha x^alpha.
struct Monomial {
  std::vector<int> exponents;  // length n
  double coeff = 0.0;
};

using RealField = std::function<double(std::span<const double>)>;
using RegionTest = std::function<bool(std::span<const double>)>;

/// sum over x in Z^n with region(x) and |x_k| <= bound of e(P(xi; x)) cutoff(x).
/// bound defaults to ceil(100 R).
cplx weyl_sum_region(std::span<const Monomial> poly, double R, const RealField& cutoff,
                     const RegionTest& region, int n, double bound = -1.0,
                     std::uint64_t budget = 100'000'000);

}  // namespace dcl
