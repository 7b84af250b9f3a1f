#include <cmath>
#include <numeric>
#include <random>

#include "dcl/error.hpp"
#include "dcl/rationals.hpp"
#include "doctest.h"

using namespace dcl;

namespace {

// Totients by sieve, independent of the gcd scan in farey_set.
std::vector<std::int64_t> totients(std::int64_t Q) {
  std::vector<std::int64_t> phi(static_cast<std::size_t>(Q + 1));
  std::iota(phi.begin(), phi.end(), 0);
  for (std::int64_t p = 2; p <= Q; ++p) {
    if (phi[static_cast<std::size_t>(p)] != p) continue;
    for (std::int64_t m = p; m <= Q; m += p) phi[static_cast<std::size_t>(m)] -= phi[static_cast<std::size_t>(m)] / p;
  }
  return phi;
}

// Smallest q <= Q with ||qx|| <= 1/Q, then the nearest a (floor on ties), by exhaustive search.
ReducedRational brute_dirichlet(double x, std::int64_t Q) {
  for (std::int64_t q = 1; q <= Q; ++q) {
    const long double t = static_cast<long double>(x) * q;
    const long double fl = std::floor(t);
    const long double a = (t - fl > 0.5L) ? fl + 1 : fl;
    if (std::abs(t - a) <= 1.0L / Q) return reduce(static_cast<std::int64_t>(a), q);
  }
  return {0, 0};
}

}  // namespace

TEST_CASE("reduce canonicalizes") {
  CHECK(reduce(2, 4) == ReducedRational{1, 2});
  CHECK(reduce(0, 7) == ReducedRational{0, 1});
  CHECK(reduce(-3, -6) == ReducedRational{1, 2});
  CHECK(reduce(3, -6) == ReducedRational{-1, 2});
  CHECK_THROWS_AS(reduce(1, 0), DomainError);
}

TEST_CASE("rational ordering is exact") {
  CHECK(ReducedRational{1, 3} < ReducedRational{1, 2});
  CHECK(ReducedRational{-1, 2} < ReducedRational{0, 1});
  CHECK((ReducedRational{2, 3} <=> ReducedRational{2, 3}) == std::strong_ordering::equal);
}

TEST_CASE("dirichlet_approx examples") {
  CHECK(dirichlet_approx(0.5, 10) == ReducedRational{1, 2});
  CHECK(dirichlet_approx(0.1415926535, 100) == ReducedRational{1, 7});
  CHECK(dirichlet_approx(1.0 / 3.0, 2) == ReducedRational{0, 1});
  CHECK(dirichlet_approx(3.25, 1) == ReducedRational{3, 1});
  CHECK(dirichlet_approx(-0.3, 3) == ReducedRational{0, 1});
  CHECK(dirichlet_approx(-0.3, 10) == ReducedRational{-1, 3});
  CHECK_THROWS_AS(dirichlet_approx(0.3, 0), DomainError);
}

TEST_CASE("dirichlet_approx satisfies the bound on random inputs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  std::uniform_int_distribution<std::int64_t> uq(1, 1'000'000);
  for (int i = 0; i < 100000; ++i) {
    const double x = ux(rng);
    const std::int64_t Q = uq(rng);
    const auto r = dirichlet_approx(x, Q);
    REQUIRE(r.den >= 1);
    REQUIRE(r.den <= Q);
    REQUIRE(std::gcd(r.num, r.den) == 1);
    const long double err = std::abs(static_cast<long double>(x) - r.value_ld());
    REQUIRE(err <= 1.0L / (static_cast<long double>(r.den) * Q) * (1.0L + 1e-12L));
  }
}

TEST_CASE("dirichlet_approx matches exhaustive smallest-q search") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  for (int i = 0; i < 3000; ++i) {
    const double x = ux(rng);
    const std::int64_t Q = 1 + static_cast<std::int64_t>(rng() % 300);
    CHECK(dirichlet_approx(x, Q) == brute_dirichlet(x, Q));
  }
}

TEST_CASE("farey_set") {
  CHECK(farey_set(1).size() == 1);
  CHECK(farey_set(2) == std::vector<ReducedRational>{{0, 1}, {1, 2}});
  CHECK(farey_set(5).size() == 10);
  const auto phi = totients(200);
  for (std::int64_t Q : {7, 31, 64, 200}) {
    std::int64_t expected = 1;
    for (std::int64_t q = 2; q <= Q; ++q) expected += phi[static_cast<std::size_t>(q)];
    const auto F = farey_set(Q);
    CHECK(static_cast<std::int64_t>(F.size()) == expected);
    CHECK(std::is_sorted(F.begin(), F.end()));
  }
}

TEST_CASE("in_Xj") {
  ArcParams p;
  p.eps1 = 1.0 / 64.0;
  p.eps2 = 1.0 / 32.0;
  SUBCASE("zero is its own arc once A_j is nonempty") {
    const auto r = in_Xj(0.0, 64, p);
    REQUIRE(r.has_value());
    CHECK(*r == ReducedRational{0, 1});
  }
  SUBCASE("empty A_j for small j") {
    CHECK_FALSE(in_Xj(0.0, 10, p).has_value());
  }
  SUBCASE("point outside every window") {
    const int j = 20;
    ArcParams q = p;
    q.eps1 = 0.25;  // A_20 = {a/q : q < 32}
    const double lam = 0.5 + 2.0 * q.xj_radius(j);
    CHECK_FALSE(in_Xj(lam, j, q).has_value());
  }
  SUBCASE("closed boundary") {
    ArcParams q = p;
    q.eps1 = 0.25;
    const int j = 8;  // A_8 = {a/q : q < 4}
    const double lam = 0.5 + q.xj_radius(j);  // exactly representable
    REQUIRE(in_Xj(lam, j, q).has_value());
    CHECK(*in_Xj(lam, j, q) == ReducedRational{1, 2});
  }
  SUBCASE("windows are disjoint") {
    ArcParams q = p;
    q.eps1 = 0.25;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int j : {4, 8, 12, 16, 24}) {
      for (int i = 0; i < 10000; ++i) CHECK(xj_candidates(u(rng), j, q).size() <= 1);
    }
  }
}

TEST_CASE("in_Mj") {
  ArcParams p;
  p.eps1 = 1.0 / 64.0;
  p.eps2 = 1.0 / 32.0;
  const double zero[1] = {0.0};
  const auto r = in_Mj(0.0, zero, 64, p);
  REQUIRE(r.has_value());
  CHECK(r->a == 0);
  CHECK(r->q == 1);
  CHECK(r->b == std::vector<std::int64_t>{0});

  ArcParams w = p;
  w.eps2 = 0.2;
  const int j = 20;  // q < 16
  const double third = 1.0 / 3.0;
  const double xi[1] = {third + 2.0 * w.mj_xi_radius(j)};
  for (const auto& c : mj_candidates(third, xi, j, w)) CHECK(c.q != 3);

  // Uniqueness against an exhaustive scan of all pairs with q < 2^floor(eps2 j).
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  w.eps2 = 0.3;
  const int jj = 14;  // q < 16, windows of width 2^-23.8 and 2^-9.8
  const std::int64_t qmax = (std::int64_t{1} << w.floor_eps2(jj)) - 1;
  int hits = 0;
  for (int i = 0; i < 4000; ++i) {
    // Bias half the samples toward arc centres so the check is not vacuous.
    double lam = u(rng), x = u(rng);
    if (i % 2 == 0) {
      const std::int64_t q = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(qmax));
      const std::int64_t a = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(q));
      const std::int64_t b = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(q));
      lam = static_cast<double>(a) / q + (u(rng) - 0.5) * w.mj_lambda_radius(jj);
      x = static_cast<double>(b) / q + (u(rng) - 0.5) * w.mj_xi_radius(jj);
    }
    const double xv[1] = {x};
    std::size_t brute = 0;
    for (std::int64_t q = 1; q <= qmax; ++q) {
      for (std::int64_t a = -q; a <= 2 * q; ++a) {
        for (std::int64_t b = -q; b <= 2 * q; ++b) {
          if (std::gcd(std::gcd(std::abs(a), std::abs(b)), q) != 1) continue;
          if (std::abs(lam - static_cast<double>(a) / q) <= w.mj_lambda_radius(jj) &&
              std::abs(x - static_cast<double>(b) / q) <= w.mj_xi_radius(jj)) {
            ++brute;
          }
        }
      }
    }
    const auto found = mj_candidates(lam, xv, jj, w);
    CHECK(found.size() == brute);
    CHECK(found.size() <= 1);
    hits += static_cast<int>(found.size());
  }
  CHECK(hits > 100);
}

TEST_CASE("enumerate_Rs") {
  const auto r1 = enumerate_Rs(1, 1);
  REQUIRE(r1.size() == 1);
  CHECK(r1[0].a == 0);
  CHECK(r1[0].q == 1);
  CHECK(enumerate_Rs(2, 1).size() == 11);
  for (int s = 1; s <= 4; ++s) {
    for (int n = 1; n <= 2; ++n) {
      std::size_t brute = 0;
      for (std::int64_t q = rs_q_lo(s); q < rs_q_hi(s); ++q) {
        for (std::int64_t a = 0; a < q; ++a) {
          for (std::int64_t b1 = 0; b1 < q; ++b1) {
            for (std::int64_t b2 = 0; b2 < (n == 2 ? q : 1); ++b2) {
              if (std::gcd(std::gcd(a, b1), std::gcd(b2, q)) == 1) ++brute;
            }
          }
        }
      }
      const auto all = enumerate_Rs(s, n);
      CHECK(all.size() == brute);
      for (const auto& p : all) {
        std::int64_t g = std::gcd(p.a, p.q);
        for (auto b : p.b) g = std::gcd(g, b);
        CHECK(g == 1);
      }
    }
  }
  CHECK_THROWS_AS(enumerate_Rs(12, 2, 1000), BudgetError);
}

TEST_CASE("lcm_range and divisor_count") {
  CHECK(lcm_range(1) == 2);
  CHECK(lcm_range(2) == 12);
  CHECK(lcm_range(3) == 840);
  std::uint64_t l = 1;
  for (std::uint64_t k = 16; k <= 32; ++k) l = std::lcm(l, k);
  CHECK(lcm_range(5) == l);
  CHECK_THROWS_AS(lcm_range(6), OverflowError);
  CHECK(divisor_count(1) == 1);
  CHECK(divisor_count(12) == 6);
  for (int k = 0; k < 40; ++k) CHECK(divisor_count(std::uint64_t{1} << k) == static_cast<std::uint64_t>(k + 1));
  CHECK(divisor_count(360) == 24);
}

TEST_CASE("ArcPair canonical form") {
  const auto p = ArcPair::make(-1, {5}, 3);
  CHECK(p.a == 2);
  CHECK(p.b == std::vector<std::int64_t>{2});
  CHECK_THROWS_AS(ArcPair::make(2, {4}, 6), DomainError);
  CHECK_THROWS_AS(ArcPair::make(0, {0}, 0), DomainError);
}

TEST_CASE("ArcParams validation") {
  ArcParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.eps1_in_asymptotic_range());
  p.eps1 = 0.25;
  p.eps2 = 0.3;
  CHECK_NOTHROW(p.validate());
  CHECK_FALSE(p.eps1_in_asymptotic_range());
  p.eps2 = 0.2;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK(ArcParams{}.floor_eps1(64) == 1);
  ArcParams t;
  t.eps1 = 0.1;
  CHECK(t.floor_eps1(30) == 3);  // 30 * 0.1 rounds below 3
}
