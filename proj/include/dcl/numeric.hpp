#pragma once

// Small numeric helpers shared by every module: e(x) = exp(2 pi i x),
// compensated complex accumulation and exact modular phase tables.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace dcl {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// e(x) with x given in cycles. The argument is reduced mod 1 first so that
/// integer shifts of x (when exactly representable) give bit-identical output.
inline cplx expi(double cycles) {
  const double frac = cycles - std::nearbyint(cycles);
  return {std::cos(kTwoPi * frac), std::sin(kTwoPi * frac)};
}

/// e(x) for an extended-precision phase; reduction happens before narrowing.
inline cplx expi(long double cycles) {
  const long double frac = cycles - std::nearbyintl(cycles);
  return expi(static_cast<double>(frac));
}

/// Neumaier-compensated complex sum. Summation order is the caller's order.
class CompensatedSum {
 public:
  void add(cplx v) {
    add_part(re_, cre_, v.real());
    add_part(im_, cim_, v.imag());
  }
  void add(const CompensatedSum& other) {
    add(other.value());
  }
  cplx value() const { return {re_ + cre_, im_ + cim_}; }

 private:
  static void add_part(double& sum, double& comp, double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double re_ = 0.0, cre_ = 0.0, im_ = 0.0, cim_ = 0.0;
};

/// Table of e(k/q) for k in [q].
class UnitRoots {
 public:
  explicit UnitRoots(std::int64_t q) : q_(q), table_(static_cast<std::size_t>(q)) {
    for (std::int64_t k = 0; k < q; ++k) {
      // Exact small-integer ratio keeps e(k/q) symmetric under k -> q-k.
      table_[static_cast<std::size_t>(k)] =
          expi(static_cast<double>(k) / static_cast<double>(q));
    }
  }
  std::int64_t modulus() const { return q_; }
  const cplx& operator[](std::int64_t k) const {
    return table_[static_cast<std::size_t>(k)];
  }

 private:
  std::int64_t q_;
  std::vector<cplx> table_;
};

inline std::int64_t floor_mod(std::int64_t x, std::int64_t m) {
  const std::int64_t r = x % m;
  return r < 0 ? r + m : r;
}

/// (base^exp) mod m for m < 2^31.
inline std::int64_t pow_mod(std::int64_t base, int exp, std::int64_t m) {
  std::int64_t result = 1 % m;
  std::int64_t b = floor_mod(base, m);
  for (int e = exp; e > 0; e >>= 1) {
    if (e & 1) result = (result * b) % m;
    b = (b * b) % m;
  }
  return result;
}

inline double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// frac(x * m) in [0, 1), with the product formed exactly in 128-bit integers
/// so that integer shifts of x leave the result unchanged.
long double frac_mul(double x, std::int64_t m);

/// Ordinary least squares slope of y on x through the origin.
double slope_through_origin(std::span<const double> x, std::span<const double> y);

/// Ordinary least squares slope of y on x with intercept.
double ols_slope(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation of y against x (average ranks for ties).
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace dcl
