#include <cmath>
#include <complex>
#include <numeric>
#include <random>

#include "dcl/error.hpp"
#include "dcl/expsums.hpp"
#include "doctest.h"

using namespace dcl;

namespace {

// Naive oracle with floating phases: q^-n sum e((a|r|^(2d) + b.r)/q).
cplx oracle_weyl(std::int64_t a, std::vector<std::int64_t> b, std::int64_t q, int d) {
  const std::size_t n = b.size();
  std::vector<std::int64_t> r(n, 0);
  std::complex<long double> acc = 0;
  while (true) {
    long double s = 0, lin = 0;
    for (std::size_t k = 0; k < n; ++k) {
      s += static_cast<long double>(r[k] * r[k]);
      lin += static_cast<long double>(b[k] * r[k]);
    }
    long double ph = (a * std::fmod(std::pow(s, d), static_cast<long double>(q)) + lin) / q;
    ph -= std::floor(ph);
    acc += std::polar(1.0L, 2.0L * 3.14159265358979323846264338327950288L * ph);
    std::size_t k = n;
    while (k-- > 0) {
      if (++r[k] < q) break;
      r[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return {static_cast<double>(acc.real() / std::pow(static_cast<long double>(q), n)),
          static_cast<double>(acc.imag() / std::pow(static_cast<long double>(q), n))};
}

}  // namespace

TEST_CASE("complete_weyl_sum examples") {
  CHECK(std::abs(complete_weyl_sum(ArcPair::make(0, {0}, 1), 1, 1).value - cplx{1, 0}) < 1e-15);
  CHECK(std::abs(complete_weyl_sum(ArcPair::make(1, {0}, 2), 1, 1).value) < 1e-15);
  CHECK(std::abs(std::abs(complete_weyl_sum(ArcPair::make(1, {0}, 3), 1, 1).value) - 1.0 / std::sqrt(3.0)) < 1e-15);
  CHECK(std::abs(complete_weyl_sum(ArcPair::make(2, {1}, 4), 1, 1).value) < 1e-15);
  CHECK(complete_weyl_sum(ArcPair::make(1, {2, 3}, 5), 1, 2).terms == 25);
}

TEST_CASE("direct and factorized paths agree with the oracle") {
  for (std::int64_t q : {1, 2, 3, 4, 7, 12, 25, 64, 100}) {
    for (std::int64_t a = 0; a < q; a += std::max<std::int64_t>(1, q / 5)) {
      for (std::int64_t b = 0; b < q; b += std::max<std::int64_t>(1, q / 4)) {
        if (std::gcd(std::gcd(a, b), q) != 1) continue;
        const auto p = ArcPair::make(a, {b}, q);
        const auto fast = complete_weyl_sum(p, 1, 1).value;
        const auto direct = complete_weyl_sum_direct(p, 1).value;
        CHECK(std::abs(fast - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
        CHECK(std::abs(direct - oracle_weyl(a, {b}, q, 1)) < 1e-12);
        const auto p2 = ArcPair::make(a, {b, (b + 1) % q}, q);
        CHECK(std::abs(complete_weyl_sum(p2, 1, 2).value - complete_weyl_sum_direct(p2, 1).value) < 1e-12);
      }
    }
  }
  for (std::int64_t q : {5, 9, 16}) {
    const auto p3 = ArcPair::make(1, {2, 0, 3}, q);
    CHECK(std::abs(complete_weyl_sum(p3, 1, 3).value - complete_weyl_sum_direct(p3, 1).value) < 1e-12);
    CHECK(std::abs(complete_weyl_sum(p3, 2, 3).value - oracle_weyl(1, {2, 0, 3}, q, 2)) < 1e-12);
  }
}

TEST_CASE("table matches pointwise sums") {
  for (int d : {1, 2, 3}) {
    for (int n : {1, 2}) {
      for (std::int64_t q : {6, 7, 9}) {
        const std::int64_t a = 5;
        const auto T = weyl_sum_table(a, q, d, n);
        std::vector<std::int64_t> b(static_cast<std::size_t>(n), 0);
        for (std::size_t idx = 0; idx < T.size(); ++idx) {
          std::int64_t g = std::gcd(a, q);
          for (auto bk : b) g = std::gcd(g, bk);
          if (g == 1) CHECK(std::abs(T[idx] - oracle_weyl(a, b, q, d)) < 1e-12);
          for (int k = n - 1; k >= 0; --k) {
            if (++b[static_cast<std::size_t>(k)] < q) break;
            b[static_cast<std::size_t>(k)] = 0;
          }
        }
      }
    }
  }
}

TEST_CASE("conjugation and modulus") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 300; ++i) {
    const std::int64_t q = 1 + static_cast<std::int64_t>(rng() % 40);
    const std::int64_t a = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(q));
    const std::int64_t b = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(q));
    if (std::gcd(std::gcd(a, b), q) != 1) continue;
    const int d = 1 + static_cast<int>(rng() % 3);
    const auto s = complete_weyl_sum(ArcPair::make(a, {b}, q), d, 1).value;
    const auto c = complete_weyl_sum(ArcPair::make(-a, {-b}, q), d, 1).value;
    CHECK(std::abs(c - std::conj(s)) < 1e-13);
    CHECK(std::abs(s) <= 1.0 + 1e-12);
  }
}

TEST_CASE("orthogonality") {
  for (int d : {1, 2}) {
    const auto r1 = verify_orthogonality(50, d, 1);
    CHECK(r1.violations.empty());
    CHECK(r1.max_abs <= 1e-9);
    CHECK(r1.cases > 0);
    const auto r2 = verify_orthogonality(20, d, 2);
    CHECK(r2.violations.empty());
    CHECK(r2.max_abs <= 1e-9);
  }
  // Prime q: only a = 0 has gcd(a, q) > 1, and then b != 0 and S = 0.
  const auto rp = verify_orthogonality(1, 1, 1);
  CHECK(rp.cases == 0);
}

TEST_CASE("decay fit") {
  for (std::int64_t q : {3, 5, 7, 11}) {
    for (std::int64_t a = 1; a < q; ++a) {
      const auto s = complete_weyl_sum(ArcPair::make(a, {0}, q), 1, 1).value;
      CHECK(std::abs(std::abs(s) - 1.0 / std::sqrt(static_cast<double>(q))) < 1e-12);
    }
  }
  const auto f1 = fit_decay_exponent(64, 1, 1);
  CHECK(f1.q.size() == 64);
  CHECK(f1.delta_hat >= 0.4);
  const auto f2 = fit_decay_exponent(64, 2, 1);
  CHECK(f2.delta_hat > 0.0);
  CHECK_THROWS_AS(fit_decay_exponent(1, 1, 1), DomainError);
}

TEST_CASE("term budget") {
  CHECK_THROWS_AS(complete_weyl_sum_direct(ArcPair::make(1, {0, 0}, 1000), 2, 1000), BudgetError);
}

TEST_CASE("region Weyl sums") {
  const auto one = [](std::span<const double>) { return 1.0; };
  const double R = 10.5;
  const auto interval = [R](std::span<const double> x) { return std::abs(x[0]) <= R; };
  std::vector<Monomial> zero{{{1}, 0.0}, {{2}, 0.0}};
  CHECK(std::abs(weyl_sum_region(zero, R, one, interval, 1) - cplx{21.0, 0.0}) < 1e-12);

  std::vector<Monomial> p{{{1}, 0.3}, {{2}, std::sqrt(2.0)}};
  std::vector<Monomial> shifted{{{1}, 1.3}, {{2}, std::sqrt(2.0)}};
  const auto smooth = [](std::span<const double> x) { return std::exp(-x[0] * x[0] / 50.0); };
  const auto a = weyl_sum_region(p, R, smooth, interval, 1);
  const auto b = weyl_sum_region(shifted, R, smooth, interval, 1);
  CHECK(std::abs(a - b) < 1e-12);

  // Degree-2 coefficient 1/2 on [0, R]: brute-force value and sub-linear growth.
  std::vector<Monomial> half{{{2}, 0.5}};
  const auto brute = [](double Rr) {
    std::complex<double> s = 0;
    for (int x = 0; x <= static_cast<int>(Rr); ++x) s += std::polar(1.0, 3.14159265358979323846 * x * x);
    return s;
  };
  for (double Rr : {100.0, 200.0}) {
    const auto pos = [Rr](std::span<const double> x) { return x[0] >= 0 && x[0] <= Rr; };
    const auto v = weyl_sum_region(half, Rr, one, pos, 1, Rr);
    CHECK(std::abs(v - brute(Rr)) < 1e-9);
    CHECK(std::abs(v) < 0.1 * Rr);
  }
}
