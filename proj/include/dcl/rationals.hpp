#pragma once

// Exact rationals and the arc sets of the circle-method decomposition:
// Farey sets, the lambda-arcs X_j, the pair sets R_s, the major arcs M_j,
// Dirichlet approximation and a few divisor utilities.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dcl {

/// a/q in lowest terms with q >= 1.
struct ReducedRational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  long double value_ld() const {
    return static_cast<long double>(num) / static_cast<long double>(den);
  }
  bool operator==(const ReducedRational&) const = default;
  std::strong_ordering operator<=>(const ReducedRational& o) const;
  std::string str() const;
};

/// Canonical form of num/den. Throws DomainError when den == 0.
ReducedRational reduce(std::int64_t num, std::int64_t den);

/// A rational pair (a/q, b/q) with gcd(a, b_1, ..., b_n, q) = 1, stored with
/// a and every b_k reduced into [0, q).
struct ArcPair {
  std::int64_t a = 0;
  std::vector<std::int64_t> b;
  std::int64_t q = 1;

  /// Canonicalizes residues; throws DomainError if q < 1 or the joint gcd is not 1.
  static ArcPair make(std::int64_t a, std::vector<std::int64_t> b, std::int64_t q);

  int dim() const { return static_cast<int>(b.size()); }
  ReducedRational alpha() const { return reduce(a, q); }
  std::vector<ReducedRational> beta() const;
  bool operator==(const ArcPair&) const = default;
  std::string str() const;
};

/// epsilon_1, epsilon_2, degree d and dimension n.
struct ArcParams {
  double eps1 = 1.0 / 64.0;
  double eps2 = 1.0 / 32.0;
  int d = 1;
  int n = 1;

  /// Throws ConfigError unless 0 < eps1 < eps2 < 1, d >= 1, n >= 1.
  void validate() const;
  /// True when eps1 lies in the range (0, 2^-5) required by the asymptotic argument.
  bool eps1_in_asymptotic_range() const { return eps1 > 0.0 && eps1 < 1.0 / 32.0; }

  /// floor(j * eps1), guarded against representation error in the product.
  int floor_eps1(int j) const;
  int floor_eps2(int j) const;
  /// Half-width 2^(-2dj + eps1 j) of the lambda-windows of X_j.
  double xj_radius(int j) const;
  /// Half-widths of the major arc M_j(alpha, beta) in lambda and xi.
  double mj_lambda_radius(int j) const;
  double mj_xi_radius(int j) const;
};

/// Signed distance x - r to the nearest integer translate of r, in [-1/2, 1/2].
long double periodic_offset(long double x, const ReducedRational& r);

/// Smallest q <= Q (then nearest a) with |x - a/q| <= 1/(qQ). Walks the
/// continued-fraction convergents of x, whose denominators are exactly the
/// record minimizers of ||qx||.
ReducedRational dirichlet_approx(double x, std::int64_t Q);

/// All reduced a/q with 0 <= a < q <= Q, ascending.
std::vector<ReducedRational> farey_set(std::int64_t Q);

/// Every alpha in A_j (not reduced mod 1) with |lambda - alpha| <= 2^(-2dj + eps1 j).
std::vector<ReducedRational> xj_candidates(double lambda, int j, const ArcParams& params);

/// The unique alpha in A_j with |lambda - alpha| <= 2^(-2dj + eps1 j), if any.
std::optional<ReducedRational> in_Xj(double lambda, int j, const ArcParams& params);

/// Every (alpha, beta) in R_s, 1 <= s <= eps2 j, whose major arc contains (lambda, xi).
std::vector<ArcPair> mj_candidates(double lambda, std::span<const double> xi, int j,
                                   const ArcParams& params);

/// The major-arc pair containing (lambda, xi), smallest q first if several exist.
std::optional<ArcPair> in_Mj(double lambda, std::span<const double> xi, int j,
                             const ArcParams& params);

/// Denominator range [2^(s-1), 2^s) of R_s.
inline std::int64_t rs_q_lo(int s) { return std::int64_t{1} << (s - 1); }
inline std::int64_t rs_q_hi(int s) { return std::int64_t{1} << s; }

/// All canonical (a, b, q) of R_s. Throws BudgetError if sum of q^(n+1) exceeds limit.
std::vector<ArcPair> enumerate_Rs(int s, int n, std::uint64_t limit = 50'000'000);

/// lcm of the integers in [2^(s-1), 2^s]. Throws OverflowError past 64 bits.
std::uint64_t lcm_range(int s);

/// Number of divisors of q.
std::uint64_t divisor_count(std::uint64_t q);

/// gcd of a list of integers (absolute values); gcd of an empty list is 0.
std::int64_t gcd_all(std::span<const std::int64_t> values);

}  // namespace dcl
