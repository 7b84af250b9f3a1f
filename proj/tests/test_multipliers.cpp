#include <cmath>
#include <random>

#include "dcl/error.hpp"
#include "dcl/expsums.hpp"
#include "dcl/multipliers.hpp"
#include "doctest.h"

using namespace dcl;

namespace {

// Direct sum in reversed order with phases in long double.
cplx oracle_m(const KernelFamily& fam, int j, double lambda, double xi) {
  const std::int64_t R = std::int64_t{1} << (j + 1);
  std::complex<long double> acc = 0;
  for (std::int64_t y = R; y >= -R; --y) {
    if (y == 0) continue;
    const std::int64_t p[1] = {y};
    const cplx k = kernel_piece_at(fam, j, p);
    const long double yl = static_cast<long double>(y);
    long double ph = static_cast<long double>(lambda) * yl * yl + static_cast<long double>(xi) * yl;
    ph -= std::floor(ph);
    acc += std::complex<long double>(k.real(), k.imag()) * std::polar(1.0L, 2.0L * std::numbers::pi_v<long double> * ph);
  }
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

double kernel_abs_sum(const KernelFamily& fam, int j) {
  double s = 0.0;
  for (const auto& p : lattice_kernel_samples(fam, j)) s += std::abs(p.value);
  return s;
}

}  // namespace

TEST_CASE("m_lattice") {
  const auto fam = KernelFamily::sign();
  const double z[1] = {0.0};
  for (int j = 1; j <= 8; ++j) CHECK(std::abs(m_lattice(fam, j, 0.0, z)) <= 1e-15);
  const double xi[1] = {0.2};
  CHECK(std::abs(m_lattice(fam, 6, 1.0 / 3.0, xi) - oracle_m(fam, 6, 1.0 / 3.0, 0.2)) <= 1e-12);

  std::mt19937_64 rng(11);
  // Values on a 2^-40 grid stay exact under integer shifts.
  auto dyadic = [&rng] { return std::ldexp(static_cast<double>(rng() >> 24), -40) - 0.5; };
  std::uniform_int_distribution<int> shift(-5, 5);
  const auto riesz = KernelFamily::riesz(2, 1);
  for (int i = 0; i < 1000; ++i) {
    const int j = 1 + static_cast<int>(rng() % 6);
    const double lam = dyadic();
    const double x1[1] = {dyadic()};
    const double x1s[1] = {x1[0] + shift(rng)};
    const auto base = m_lattice(fam, j, lam, x1);
    CHECK(m_lattice(fam, j, lam, x1s) == base);
    CHECK(m_lattice(fam, j, lam + 1.0, x1) == base);
    if (i % 10 == 0) {
      const double x2[2] = {dyadic(), dyadic()};
      const double x2s[2] = {x2[0] + 2.0, x2[1] - 3.0};
      CHECK(m_lattice(riesz, std::min(j, 4), lam, x2s) == m_lattice(riesz, std::min(j, 4), lam, x2));
    }
  }
  CHECK_THROWS_AS(m_lattice(fam, 30, 0.0, z, 1000), BudgetError);
}

TEST_CASE("m_lattice_arc matches m_lattice") {
  const auto fam = KernelFamily::sign();
  const auto pair = ArcPair::make(1, {2}, 5);
  const double eta[1] = {0.001};
  const double xi[1] = {0.4 + 0.001};
  const auto a = m_lattice_arc(fam, 6, pair, 1e-4L, eta);
  const auto b = m_lattice(fam, 6, 0.2 + 1e-4, xi);
  CHECK(std::abs(a - b) <= 1e-12 * kernel_abs_sum(fam, 6));
}

TEST_CASE("m_grid agrees with direct summation") {
  std::mt19937_64 rng(3);
  for (const auto& fam : {KernelFamily::sign(), KernelFamily::riesz(2, 0)}) {
    for (int j : {2, 4}) {
      for (double lam : {0.0, 0.137, 1.0 / 3.0}) {
        const std::int64_t N = std::int64_t{1} << (j + 3);
        const auto g = m_grid(fam, j, lam, N);
        CHECK(g.values.size() == static_cast<std::size_t>(std::pow(N, fam.n)));
        const double abs_sum = kernel_abs_sum(fam, j);
        const double tol = 1e-10 * abs_sum;
        for (int t = 0; t < 100; ++t) {
          std::vector<std::int64_t> k(static_cast<std::size_t>(fam.n));
          std::vector<double> xi(k.size());
          for (std::size_t a = 0; a < k.size(); ++a) {
            k[a] = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(N));
            xi[a] = static_cast<double>(k[a]) / static_cast<double>(N);
          }
          CHECK(std::abs(g.at(k) - m_lattice(fam, j, lam, xi)) <= tol);
        }
        for (const auto& v : g.values) CHECK(std::abs(v) <= abs_sum * (1 + 1e-12));
      }
    }
  }
  const auto fam = KernelFamily::sign();
  CHECK(m_grid(fam, 5, 0.0, 256).values[0] == cplx{});
  const auto g0 = m_grid(fam, 5, 0.3125, 256);
  const auto g1 = m_grid(fam, 5, 1.3125, 256);
  CHECK(g0.values == g1.values);
  CHECK_THROWS_AS(m_grid(fam, 5, 0.0, 128), DomainError);
  CHECK_THROWS_AS(m_grid(fam, 3, 0.0, 100), DomainError);
}

TEST_CASE("approx_error") {
  const auto fam = KernelFamily::sign();
  const double z[1] = {0.0};
  const auto r0 = approx_error(fam, 6, ArcPair::make(0, {0}, 1), 0.0, z);
  CHECK(std::abs(r0.err) <= 1e-10);
  CHECK_THROWS_AS(approx_error(fam, 4, ArcPair::make(1, {0}, 5), 0.2, z), DomainError);
  CHECK_THROWS_AS(approx_error(fam, 6, ArcPair::make(1, {0}, 3), 0.0, z), DomainError);

  // Shrinking the lambda offset does not increase the error once delta <= 1/16,
  // up to the q 4^-j floor of the lattice-versus-integral discretization.
  const auto pair = ArcPair::make(1, {1}, 3);
  for (int j : {6, 8, 10}) {
    for (double off : {0.004, 0.0005}) {
      const double xi[1] = {1.0 / 3.0 + off};
      double prev = -1.0;
      for (int k = 0; k < 9; ++k) {
        const double nu = std::ldexp(0.5, -j - k);
        const auto r = approx_error(fam, j, pair, 1.0 / 3.0 + nu, xi);
        CHECK(std::isfinite(r.bound_ratio));
        CHECK(r.bound_ratio <= 1.0);
        if (prev >= 0.0) CHECK(std::abs(r.err) <= prev + 3.0 * std::ldexp(1.0, -2 * j));
        if (k >= 3) prev = std::abs(r.err);
      }
    }
  }
  const int j = 8;
  const double xi[1] = {1.0 / 3.0 + 0.004};
  // delta is at least 2^-j and covers both offsets.
  const double d = approx_delta(j, 1, pair, 1.0 / 3.0 + 1e-3, xi);
  CHECK(d >= std::ldexp(1.0, -j));
  CHECK(d >= 1e-3 * std::ldexp(1.0, j) * 0.999);
  CHECK(d >= 0.004 * 0.999);
}

TEST_CASE("cutoffs") {
  CutoffSpec cut;
  cut.validate(1);
  cut.validate(3);
  CHECK_THROWS_AS(cut.validate(4), ConfigError);
  CHECK(cut.nested());
  const double a[1] = {0.25};
  const double b[1] = {0.5};
  const double c[1] = {0.75};
  CHECK(cut.chi(a) == 1.0);
  CHECK(cut.chi(b) == 0.0);
  CHECK(cut.chi_tilde(b) == 1.0);
  CHECK(cut.chi_tilde(c) > 0.0);
  CHECK(cut.chi_tilde(c) < 1.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int i = 0; i < 10000; ++i) {
    const double x[2] = {u(rng), u(rng)};
    if (cut.chi(x) > 0.0) CHECK(cut.chi_tilde(x) == 1.0);
  }
  const double x[1] = {std::ldexp(0.3, -20)};
  const double x1[1] = {0.3};
  CHECK(cut.chi_s(2, x) == cut.chi(x1));
  CHECK(cut.chi_s_radius(1) == std::ldexp(0.5, -10));
  CutoffSpec broken = cut;
  broken.tilde_plateau = 0.3;
  broken.tilde_support = 0.4;
  CHECK_FALSE(broken.nested());
}

TEST_CASE("L and E") {
  const auto fam = KernelFamily::sign();
  ArcParams p;
  CutoffSpec cut;
  // s = 1 needs j >= 64 at eps1 = 1/64; use a coarser eps1 for tractable j.
  p.eps1 = 0.25;
  p.eps2 = 0.5;
  const int j = 8;
  const double xi[1] = {1e-5};
  const double lam = 1e-6;
  const auto L = L_sj(fam, 1, j, lam, xi, p, cut);
  CHECK(L.terms == 1);
  const auto star = phi_star(fam, j, lam, xi, p);
  CHECK(std::abs(L.value - star.value * cut.chi_s(1, xi)) <= 1e-12);
  CHECK_THROWS_AS(L_sj(fam, 3, j, lam, xi, p, cut), DomainError);

  // lambda outside X_j: everything vanishes.
  const double far = 0.1234;
  REQUIRE_FALSE(in_Xj(far, j, p).has_value());
  CHECK(L_sj(fam, 1, j, far, xi, p, cut).value == cplx{});
  const auto e_far = E_j(fam, j, far, xi, p, cut);
  CHECK(e_far.value == cplx{});
  CHECK_FALSE(e_far.in_Xj);

  // lambda = 0 with xi off every cutoff support: E = m.
  const double off[1] = {0.37};
  const auto e0 = E_j(fam, j, 0.0, off, p, cut);
  CHECK(e0.in_Xj);
  CHECK(e0.terms == 0);
  CHECK(e0.value == m_lattice(fam, j, 0.0, off));

  // E_grid agrees with pointwise E_j.
  const std::int64_t N = std::int64_t{1} << (j + 3);
  double qerr = 0.0;
  const auto grid = E_grid(fam, j, lam, N, p, cut, {}, &qerr);
  for (std::int64_t k : {std::int64_t{0}, std::int64_t{1}, N / 3, N - 1}) {
    const double x[1] = {static_cast<double>(k) / static_cast<double>(N)};
    CHECK(std::abs(grid[static_cast<std::size_t>(k)] - E_j(fam, j, lam, x, p, cut).value) <= 1e-10);
  }
}

TEST_CASE("disjointness of arc terms") {
  ArcParams p;
  p.eps1 = 0.25;
  p.eps2 = 0.5;
  CutoffSpec cut;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 1; s <= 3; ++s) {
    const int j = 4 * s + 2;
    std::size_t nonzero = 0;
    for (int i = 0; i < 10000; ++i) {
      // Half of the samples are planted on a rational so that the windows are hit.
      double lam = u(rng), xi = u(rng);
      if (i % 2 == 0) {
        const std::int64_t q = rs_q_lo(s) + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(rs_q_lo(s)));
        const auto a = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(q));
        const auto b = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(q));
        lam = static_cast<double>(a) / q + (u(rng) - 0.5) * p.xj_radius(j);
        xi = static_cast<double>(b) / q + (u(rng) - 0.5) * cut.chi_s_radius(s);
      }
      const double x[1] = {xi};
      const auto terms = arc_terms(s, j, lam, x, p, cut);
      CHECK(terms.size() <= 1);
      nonzero += terms.size();
      const auto sh = script_L_sharp(s, [](std::span<const double>) { return cplx{1.0, 0.0}; }, x, cut);
      CHECK(sh.terms <= 1);
    }
    CHECK(nonzero > 100);
  }
}

TEST_CASE("script_L and factorization") {
  CutoffSpec cut;
  const Multiplier one = [](std::span<const double>) { return cplx{1.0, 0.0}; };
  const double x0[1] = {0.2};
  CHECK(script_L(2, reduce(1, 5), one, x0, cut).value == cplx{});
  const double c[1] = {2.0 / 3.0};
  const auto centered = script_L(2, reduce(1, 3), one, c, cut);
  CHECK(centered.terms == 1);
  CHECK(std::abs(centered.value - complete_weyl_sum(ArcPair::make(1, {2}, 3), 1, 1).value) <= 1e-14);
  CHECK(script_L_sharp(2, one, c, cut).value == cplx{1.0, 0.0});
  const double far[1] = {0.01};
  CHECK(script_L_sharp(2, one, far, cut).value == cplx{});

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto fam = KernelFamily::sign();
  std::size_t hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const int s = 1 + static_cast<int>(i % 3);
    const int n = (i % 5 == 0) ? 2 : 1;
    const std::int64_t q = rs_q_lo(s) + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(rs_q_lo(s)));
    const auto a = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(q));
    const auto alpha = reduce(a, q);
    std::vector<double> xi(static_cast<std::size_t>(n));
    for (auto& v : xi) {
      const auto b = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(q));
      v = static_cast<double>(b) / q + (u(rng) - 0.5) * 1.2 * cut.chi_s_radius(s);
    }
    Multiplier m;
    if (i % 2 == 0 && n == 1) {
      const int j = 3 + static_cast<int>(rng() % 3);
      const double lam = (u(rng) - 0.5) * 1e-3;
      m = [fam, j, lam](std::span<const double> e) { return phi(fam, j, lam, e).value; };
    } else {
      const double f1 = u(rng), f2 = u(rng);
      m = [f1, f2](std::span<const double> e) {
        double t = 0.0;
        for (double v : e) t += v;
        return cplx{1.0 + f1 * std::cos(kTwoPi * 3 * t), f2 * std::sin(kTwoPi * 5 * t)};
      };
    }
    const int d = 1 + static_cast<int>(rng() % 2);
    const auto lhs = script_L(s, alpha, m, xi, cut, d);
    const auto rhs = script_L(s, alpha, one, xi, cut, d).value * script_L_sharp(s, m, xi, cut).value;
    CHECK(std::abs(lhs.value - rhs) <= 1e-10);
    hits += lhs.terms;
  }
  CHECK(hits > 100);
}

TEST_CASE("Poisson summation oracle") {
  // For j >= 2 the piece K_j is smooth, so m_{j,a/q+nu}(xi) = sum_k S(a/q, k/q) Phi_{j,nu}(xi - k/q)
  // exactly; the far terms are negligible once |xi - k/q| > 3.
  const auto fam = KernelFamily::sign();
  for (int j : {6, 8}) {
    for (std::int64_t q : {1, 3, 5, 8}) {
      const std::int64_t a = q == 1 ? 0 : (q == 8 ? 3 : 1);
      const double nu = 0.3 * std::ldexp(1.0, -2 * j + 1);
      const double xi[1] = {0.237};
      const auto m = m_lattice(fam, j, static_cast<double>(a) / static_cast<double>(q) + nu, xi);
      cplx acc{};
      for (std::int64_t k = -3 * q; k <= 4 * q; ++k) {
        const double eta[1] = {0.237 - static_cast<double>(k) / static_cast<double>(q)};
        if (std::abs(eta[0]) > 3.0) continue;
        acc += complete_weyl_sum(ArcPair::make(a, {floor_mod(k, q)}, q), 1, 1).value * phi(fam, j, nu, eta).value;
      }
      CHECK(std::abs(m - acc) <= 1e-12);
    }
  }
}
