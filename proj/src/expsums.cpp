#include "dcl/expsums.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dcl/error.hpp"
#include "dcl/parallel.hpp"

namespace dcl {

namespace {

std::uint64_t checked_power(std::int64_t q, int n, std::uint64_t budget, const char* what) {
  long double terms = 1.0L;
  for (int k = 0; k < n; ++k) terms *= static_cast<long double>(q);
  if (terms > static_cast<long double>(budget)) {
    throw BudgetError(std::string(what) + ": " + std::to_string(static_cast<double>(terms)) +
                      " terms exceed the budget");
  }
  return static_cast<std::uint64_t>(terms);
}

void check_modulus(std::int64_t q) {
  if (q < 1) throw DomainError("Weyl sum: q must be positive");
  if (q >= (std::int64_t{1} << 31)) throw OverflowError("Weyl sum: q must be below 2^31");
}

// Sum over the trailing coordinates of [q]^n for a fixed leading coordinate.
cplx direct_slice(const ArcPair& pair, int d, const UnitRoots& roots, std::int64_t lead) {
  const std::int64_t q = pair.q;
  const std::size_t n = pair.b.size();
  std::vector<std::int64_t> r(n, 0);
  r[0] = lead;
  std::uint64_t count = 1;
  for (std::size_t k = 1; k < n; ++k) count *= static_cast<std::uint64_t>(q);
  CompensatedSum acc;
  for (std::uint64_t it = 0; it < count; ++it) {
    std::int64_t lin = 0;
    for (std::size_t k = 0; k < n; ++k) lin = (lin + pair.b[k] * r[k]) % q;
    acc.add(roots[(pair.a * norm_power_mod(r, d, q) + lin) % q]);
    for (std::size_t k = n - 1; k >= 1; --k) {
      if (++r[k] < q) break;
      r[k] = 0;
    }
  }
  return acc.value();
}

}  // namespace

std::int64_t norm_power_mod(std::span<const std::int64_t> r, int d, std::int64_t m) {
  std::int64_t s = 0;
  for (auto v : r) {
    const std::int64_t t = floor_mod(v, m);
    s = (s + t * t) % m;
  }
  return pow_mod(s, d, m);
}

WeylSumResult complete_weyl_sum_direct(const ArcPair& pair, int d, std::uint64_t budget) {
  check_modulus(pair.q);
  if (d < 1) throw DomainError("Weyl sum: d must be positive");
  if (pair.b.empty()) throw DomainError("Weyl sum: dimension must be positive");
  const int n = pair.dim();
  const std::uint64_t terms = checked_power(pair.q, n, budget, "complete_weyl_sum");
  const UnitRoots roots(pair.q);
  // One block per leading coordinate; blocks are combined in index order.
  std::vector<cplx> blocks(static_cast<std::size_t>(pair.q));
  auto body = [&](std::size_t i) {
    blocks[i] = direct_slice(pair, d, roots, static_cast<std::int64_t>(i));
  };
  if (terms >= (1u << 20)) {
    parallel_for(blocks.size(), body);
  } else {
    for (std::size_t i = 0; i < blocks.size(); ++i) body(i);
  }
  CompensatedSum total;
  for (const auto& v : blocks) total.add(v);
  return {total.value() / static_cast<double>(terms), pair.q, terms};
}

WeylSumResult complete_weyl_sum(const ArcPair& pair, int d, int n, std::uint64_t budget) {
  if (n != pair.dim()) throw DomainError("Weyl sum: pair dimension differs from n");
  if (d != 1) return complete_weyl_sum_direct(pair, d, budget);
  check_modulus(pair.q);
  const std::int64_t q = pair.q;
  const std::uint64_t terms = checked_power(q, n, budget, "complete_weyl_sum");
  const UnitRoots roots(q);
  cplx prod{1.0, 0.0};
  for (auto bk : pair.b) {
    CompensatedSum acc;
    for (std::int64_t r = 0; r < q; ++r) {
      acc.add(roots[(pair.a * ((r * r) % q) + bk * r) % q]);
    }
    prod *= acc.value() / static_cast<double>(q);
  }
  return {prod, q, terms};
}

std::vector<cplx> weyl_sum_table(std::int64_t a, std::int64_t q, int d, int n,
                                 std::uint64_t budget) {
  check_modulus(q);
  if (n < 1 || d < 1) throw DomainError("weyl_sum_table: n and d must be positive");
  const std::uint64_t size = checked_power(q, n, budget, "weyl_sum_table");
  if (static_cast<long double>(size) * q * n > static_cast<long double>(budget) * 4) {
    throw BudgetError("weyl_sum_table: transform cost exceeds the budget");
  }
  const UnitRoots roots(q);
  a = floor_mod(a, q);
  std::vector<cplx> data(size);
  std::vector<std::int64_t> r(static_cast<std::size_t>(n), 0);
  for (std::uint64_t idx = 0; idx < size; ++idx) {
    data[idx] = roots[(a * norm_power_mod(r, d, q)) % q];
    for (int k = n - 1; k >= 0; --k) {
      if (++r[static_cast<std::size_t>(k)] < q) break;
      r[static_cast<std::size_t>(k)] = 0;
    }
  }
  // Separable DFT along each axis: out[b] = sum_r in[r] e(b r / q).
  std::vector<cplx> line(static_cast<std::size_t>(q));
  std::uint64_t stride = 1;
  for (int axis = n - 1; axis >= 0; --axis) {
    const std::uint64_t block = stride * static_cast<std::uint64_t>(q);
    for (std::uint64_t base = 0; base < size; base += block) {
      for (std::uint64_t off = 0; off < stride; ++off) {
        for (std::int64_t b = 0; b < q; ++b) {
          CompensatedSum acc;
          for (std::int64_t rr = 0; rr < q; ++rr) {
            acc.add(data[base + off + static_cast<std::uint64_t>(rr) * stride] * roots[(b * rr) % q]);
          }
          line[static_cast<std::size_t>(b)] = acc.value();
        }
        for (std::int64_t b = 0; b < q; ++b) {
          data[base + off + static_cast<std::uint64_t>(b) * stride] = line[static_cast<std::size_t>(b)];
        }
      }
    }
    stride = block;
  }
  const double norm = 1.0 / static_cast<double>(size);
  for (auto& v : data) v *= norm;
  return data;
}

OrthogonalityReport verify_orthogonality(std::int64_t q_max, int d, int n, double tol) {
  if (q_max < 1) throw DomainError("verify_orthogonality: q_max must be positive");
  std::vector<OrthogonalityReport> per_q(static_cast<std::size_t>(q_max));
  parallel_for(per_q.size(), [&](std::size_t i) {
    const std::int64_t q = static_cast<std::int64_t>(i) + 1;
    auto& rep = per_q[i];
    for (std::int64_t a = 0; a < q; ++a) {
      if (std::gcd(a, q) == 1) continue;
      const auto table = weyl_sum_table(a, q, d, n);
      std::vector<std::int64_t> b(static_cast<std::size_t>(n), 0);
      for (std::size_t idx = 0; idx < table.size(); ++idx) {
        std::int64_t g = std::gcd(a, q);
        for (auto bk : b) g = std::gcd(g, bk);
        if (g == 1) {
          ++rep.cases;
          const double v = std::abs(table[idx]);
          rep.max_abs = std::max(rep.max_abs, v);
          if (v > tol) rep.violations.push_back(ArcPair::make(a, b, q));
        }
        for (int k = n - 1; k >= 0; --k) {
          if (++b[static_cast<std::size_t>(k)] < q) break;
          b[static_cast<std::size_t>(k)] = 0;
        }
      }
    }
  });
  OrthogonalityReport total;
  for (auto& rep : per_q) {
    total.cases += rep.cases;
    total.max_abs = std::max(total.max_abs, rep.max_abs);
    for (auto& v : rep.violations) total.violations.push_back(std::move(v));
  }
  return total;
}

DecayFit fit_decay_exponent(std::int64_t q_max, int d, int n) {
  if (q_max < 2) throw DomainError("fit_decay_exponent: q_max must be at least 2");
  DecayFit fit;
  fit.q.resize(static_cast<std::size_t>(q_max));
  fit.max_abs.resize(static_cast<std::size_t>(q_max));
  parallel_for(fit.q.size(), [&](std::size_t i) {
    const std::int64_t q = static_cast<std::int64_t>(i) + 1;
    double best = 0.0;
    for (std::int64_t a = 0; a < q; ++a) {
      if (std::gcd(a, q) != 1) continue;
      for (const auto& v : weyl_sum_table(a, q, d, n)) best = std::max(best, std::abs(v));
    }
    fit.q[i] = q;
    fit.max_abs[i] = best;
  });
  std::vector<double> x, y;
  for (std::size_t i = 0; i < fit.q.size(); ++i) {
    x.push_back(std::log(static_cast<double>(fit.q[i])));
    y.push_back(-std::log(fit.max_abs[i]));
  }
  fit.delta_hat = slope_through_origin(x, y);
  return fit;
}

cplx weyl_sum_region(std::span<const Monomial> poly, double R, const RealField& cutoff,
                     const RegionTest& region, int n, double bound, std::uint64_t budget) {
  if (n < 1) throw DomainError("weyl_sum_region: n must be positive");
  if (!(R > 0.0)) throw DomainError("weyl_sum_region: R must be positive");
  for (const auto& m : poly) {
    if (static_cast<int>(m.exponents.size()) != n) {
      throw DomainError("weyl_sum_region: monomial arity differs from n");
    }
  }
  const auto B = static_cast<std::int64_t>(std::ceil(bound < 0.0 ? 100.0 * R : bound));
  checked_power(2 * B + 1, n, budget, "weyl_sum_region");
  std::vector<std::int64_t> x(static_cast<std::size_t>(n), -B);
  std::vector<double> xd(static_cast<std::size_t>(n));
  CompensatedSum acc;
  while (true) {
    for (int k = 0; k < n; ++k) xd[static_cast<std::size_t>(k)] = static_cast<double>(x[static_cast<std::size_t>(k)]);
    if (region(xd)) {
      const double w = cutoff(xd);
      if (w != 0.0) {
        long double phase = 0.0L;
        for (const auto& m : poly) {
          __int128 mono = 1;
          for (int k = 0; k < n; ++k) {
            for (int e = 0; e < m.exponents[static_cast<std::size_t>(k)]; ++e) mono *= x[static_cast<std::size_t>(k)];
          }
          if (mono > INT64_MAX || mono < INT64_MIN) throw OverflowError("weyl_sum_region: monomial overflow");
          phase += frac_mul(m.coeff, static_cast<std::int64_t>(mono));
        }
        acc.add(w * expi(phase));
      }
    }
    int k = n - 1;
    for (; k >= 0; --k) {
      if (++x[static_cast<std::size_t>(k)] <= B) break;
      x[static_cast<std::size_t>(k)] = -B;
    }
    if (k < 0) break;
  }
  return acc.value();
}

}  // namespace dcl
