#include "dcl/multipliers.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "dcl/error.hpp"
#include "dcl/expsums.hpp"
#include "dcl/fft.hpp"
#include "dcl/parallel.hpp"

namespace dcl {

namespace {

// |y|^(2d) as an exact integer.
std::int64_t norm_power(std::span<const std::int64_t> y, int d) {
  __int128 s = 0;
  for (auto v : y) s += static_cast<__int128>(v) * v;
  __int128 p = 1;
  for (int k = 0; k < d; ++k) {
    p *= s;
    if (p > INT64_MAX) throw OverflowError("|y|^(2d) exceeds 64 bits");
  }
  return static_cast<std::int64_t>(p);
}

// Iterates the kernel box [-R, R]^n in lexicographic order, calling
// fn(y, K_j(y)) for nonzero samples.
template <class Fn>
void for_each_kernel_sample(const KernelFamily& fam, int j, std::uint64_t budget, Fn&& fn) {
  const auto R = static_cast<std::int64_t>(piece_outer_radius(j));
  const auto box = kernel_box(fam, j, budget);
  const auto n = static_cast<std::size_t>(fam.n);
  std::vector<std::int64_t> y(n, -R);
  for (double v : box) {
    if (v != 0.0) fn(std::span<const std::int64_t>(y), v);
    for (std::size_t k = n; k-- > 0;) {
      if (++y[k] <= R) break;
      y[k] = -R;
    }
  }
}

std::pair<std::int64_t, std::int64_t> int_window(long double center, long double radius) {
  return {static_cast<std::int64_t>(std::ceil(center - radius)),
          static_cast<std::int64_t>(std::floor(center + radius))};
}

// Calls fn(b) for every integer vector b with |xi_k q - b_k| <= radius q in each coordinate.
template <class Fn>
void for_each_b_window(std::span<const double> xi, std::int64_t q, double radius, Fn&& fn) {
  const std::size_t n = xi.size();
  std::vector<std::pair<std::int64_t, std::int64_t>> ranges(n);
  for (std::size_t k = 0; k < n; ++k) {
    ranges[k] = int_window(static_cast<long double>(xi[k]) * q, static_cast<long double>(radius) * q);
    if (ranges[k].first > ranges[k].second) return;
  }
  std::vector<std::int64_t> b(n);
  for (std::size_t k = 0; k < n; ++k) b[k] = ranges[k].first;
  while (true) {
    fn(std::span<const std::int64_t>(b));
    std::size_t k = 0;
    for (; k < n; ++k) {
      if (++b[k] <= ranges[k].second) break;
      b[k] = ranges[k].first;
    }
    if (k == n) return;
  }
}

std::vector<double> offsets(std::span<const double> xi, std::span<const std::int64_t> b, std::int64_t q) {
  std::vector<double> eta(xi.size());
  for (std::size_t k = 0; k < xi.size(); ++k) {
    eta[k] = static_cast<double>(static_cast<long double>(xi[k]) -
                                 static_cast<long double>(b[k]) / static_cast<long double>(q));
  }
  return eta;
}

}  // namespace

std::size_t MultiplierGrid::index(std::span<const std::int64_t> k) const {
  std::size_t idx = 0;
  for (auto v : k) idx = idx * static_cast<std::size_t>(N) + static_cast<std::size_t>(floor_mod(v, N));
  return idx;
}

cplx m_lattice(const KernelFamily& fam, int j, double lambda, std::span<const double> xi,
               std::uint64_t budget) {
  if (static_cast<int>(xi.size()) != fam.n) throw DomainError("m_lattice: xi has the wrong dimension");
  CompensatedSum acc;
  for_each_kernel_sample(fam, j, budget, [&](std::span<const std::int64_t> y, double K) {
    long double ph = frac_mul(lambda, norm_power(y, fam.d));
    for (std::size_t k = 0; k < y.size(); ++k) ph += frac_mul(xi[k], y[k]);
    acc.add(K * expi(ph));
  });
  return acc.value();
}

cplx m_lattice_arc(const KernelFamily& fam, int j, const ArcPair& pair, long double nu,
                   std::span<const double> eta, std::uint64_t budget) {
  if (static_cast<int>(eta.size()) != fam.n || pair.dim() != fam.n) {
    throw DomainError("m_lattice_arc: dimension mismatch");
  }
  const std::int64_t q = pair.q;
  CompensatedSum acc;
  for_each_kernel_sample(fam, j, budget, [&](std::span<const std::int64_t> y, double K) {
    const std::int64_t P = norm_power(y, fam.d);
    std::int64_t idx = static_cast<std::int64_t>((static_cast<__int128>(pair.a) * (P % q)) % q);
    for (std::size_t k = 0; k < y.size(); ++k) idx = (idx + pair.b[k] * floor_mod(y[k], q)) % q;
    long double ph = static_cast<long double>(idx) / q + nu * static_cast<long double>(P);
    for (std::size_t k = 0; k < y.size(); ++k) ph += static_cast<long double>(eta[k]) * y[k];
    acc.add(K * expi(ph));
  });
  return acc.value();
}

MultiplierGrid m_grid(const KernelFamily& fam, int j, double lambda, std::int64_t N,
                      std::uint64_t budget) {
  if (N < 1 || (N & (N - 1)) != 0) throw DomainError("m_grid: N must be a power of two");
  if (N < (std::int64_t{1} << (j + 3))) throw DomainError("m_grid: N must be at least 2^(j+3)");
  long double total = 1.0L;
  for (int k = 0; k < fam.n; ++k) total *= static_cast<long double>(N);
  if (total > static_cast<long double>(budget)) throw BudgetError("m_grid: grid exceeds the budget");
  MultiplierGrid g;
  g.n = fam.n;
  g.N = N;
  g.j = j;
  g.lambda = lambda;
  AlignedBuffer buf(static_cast<std::size_t>(total));
  std::vector<std::int64_t> k(static_cast<std::size_t>(fam.n));
  for_each_kernel_sample(fam, j, budget, [&](std::span<const std::int64_t> y, double K) {
    for (std::size_t a = 0; a < y.size(); ++a) k[a] = y[a];
    buf[g.index(k)] += K * expi(frac_mul(lambda, norm_power(y, fam.d)));
  });
  const std::vector<int> shape(static_cast<std::size_t>(fam.n), static_cast<int>(N));
  fft_inplace(buf, shape, FftDirection::Backward);
  g.values.assign(buf.begin(), buf.end());
  return g;
}

double approx_delta(int j, int d, const ArcPair& pair, double lambda, std::span<const double> xi) {
  const long double nu = periodic_offset(lambda, pair.alpha());
  double eta2 = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    const double e = static_cast<double>(periodic_offset(xi[k], reduce(pair.b[k], pair.q)));
    eta2 += e * e;
  }
  return std::max({static_cast<double>(std::abs(nu)) * std::ldexp(1.0, (2 * d - 1) * j),
                   std::sqrt(eta2), std::ldexp(1.0, -j)});
}

ApproxResult approx_error(const KernelFamily& fam, int j, const ArcPair& pair, double lambda,
                          std::span<const double> xi, const QuadratureSpec& quad) {
  if (pair.dim() != fam.n || static_cast<int>(xi.size()) != fam.n) {
    throw DomainError("approx_error: dimension mismatch");
  }
  if (j < 2 || pair.q > (std::int64_t{1} << (j - 2))) {
    throw DomainError("approx_error: requires q <= 2^(j-2)");
  }
  ApproxResult out;
  out.delta = approx_delta(j, fam.d, pair, lambda, xi);
  if (!(out.delta < 1.0)) throw DomainError("approx_error: no admissible delta < 1");
  const long double nu = periodic_offset(lambda, pair.alpha());
  std::vector<double> eta(xi.size());
  for (std::size_t k = 0; k < xi.size(); ++k) {
    eta[k] = static_cast<double>(periodic_offset(xi[k], reduce(pair.b[k], pair.q)));
  }
  out.m = m_lattice_arc(fam, j, pair, nu, eta);
  const auto S = complete_weyl_sum(pair, fam.d, fam.n).value;
  const auto ph = phi(fam, j, static_cast<double>(nu), eta, quad);
  out.main_term = S * ph.value;
  out.quad_error = std::abs(S) * ph.error_estimate;
  out.err = out.m - out.main_term;
  out.bound_ratio = std::abs(out.err) / (static_cast<double>(pair.q) * out.delta);
  return out;
}

void CutoffSpec::validate(int n) const {
  if (scale_exponent < 1) throw ConfigError("cutoff scale exponent must be positive");
  if (!(std::sqrt(static_cast<double>(n)) / 4.0 < 0.5)) {
    throw ConfigError("chi cannot be 1 on [-1/4,1/4]^n inside |xi| <= 1/2 for n >= 4");
  }
  if (!(tilde_plateau > 0.0 && tilde_plateau < tilde_support)) {
    throw ConfigError("chi~ plateau must lie below its support radius");
  }
}

double CutoffSpec::chi(std::span<const double> xi) const {
  return radial_cutoff(l2_norm(xi), std::sqrt(static_cast<double>(xi.size())) / 4.0, 0.5);
}

double CutoffSpec::chi_tilde(std::span<const double> xi) const {
  return radial_cutoff(l2_norm(xi), tilde_plateau, tilde_support);
}

double CutoffSpec::chi_s(int s, std::span<const double> xi) const {
  const double r = std::ldexp(l2_norm(xi), scale_exponent * s);
  return radial_cutoff(r, std::sqrt(static_cast<double>(xi.size())) / 4.0, 0.5);
}

double CutoffSpec::chi_tilde_s(int s, std::span<const double> xi) const {
  const double r = std::ldexp(l2_norm(xi), scale_exponent * s);
  return radial_cutoff(r, tilde_plateau, tilde_support);
}

double CutoffSpec::chi_s_radius(int s) const { return std::ldexp(0.5, -scale_exponent * s); }
double CutoffSpec::chi_tilde_s_radius(int s) const {
  return std::ldexp(tilde_support, -scale_exponent * s);
}

std::vector<ArcTerm> arc_terms(int s, int j, double lambda, std::span<const double> xi,
                               const ArcParams& params, const CutoffSpec& cut) {
  if (s < 1 || j < 1) throw DomainError("arc_terms: s and j must be positive");
  if (s > 30) throw BudgetError("arc_terms: s too large");
  std::vector<ArcTerm> out;
  const long double w = params.xj_radius(j);
  const double rad = cut.chi_s_radius(s);
  for (std::int64_t q = rs_q_lo(s); q < rs_q_hi(s); ++q) {
    const auto [alo, ahi] = int_window(static_cast<long double>(lambda) * q, w * q);
    for (std::int64_t a = alo; a <= ahi; ++a) {
      const std::int64_t ac = floor_mod(a, q);
      if (std::gcd(ac, q) != 1) continue;  // S vanishes
      const long double nu = static_cast<long double>(lambda) - static_cast<long double>(a) / q;
      if (std::abs(nu) > w) continue;
      for_each_b_window(xi, q, rad, [&](std::span<const std::int64_t> b) {
        auto eta = offsets(xi, b, q);
        const double c = cut.chi_s(s, eta);
        if (c <= 0.0) return;
        ArcTerm t;
        t.pair = ArcPair::make(ac, std::vector<std::int64_t>(b.begin(), b.end()), q);
        t.s = s;
        t.nu = nu;
        t.eta = std::move(eta);
        t.chi = c;
        out.push_back(std::move(t));
      });
    }
  }
  return out;
}

LResult L_sj(const KernelFamily& fam, int s, int j, double lambda, std::span<const double> xi,
             const ArcParams& params, const CutoffSpec& cut, const QuadratureSpec& quad) {
  if (s < 1 || s > params.floor_eps1(j)) throw DomainError("L_sj: requires 1 <= s <= eps1 j");
  LResult out;
  CompensatedSum acc;
  for (const auto& t : arc_terms(s, j, lambda, xi, params, cut)) {
    const cplx S = complete_weyl_sum(t.pair, fam.d, fam.n).value;
    const auto ph = phi(fam, j, static_cast<double>(t.nu), t.eta, quad);
    acc.add(S * ph.value * t.chi);
    out.quad_error += std::abs(S) * ph.error_estimate * t.chi;
    ++out.terms;
  }
  out.value = acc.value();
  return out;
}

EResult E_j(const KernelFamily& fam, int j, double lambda, std::span<const double> xi,
            const ArcParams& params, const CutoffSpec& cut, const QuadratureSpec& quad) {
  EResult out;
  out.in_Xj = in_Xj(lambda, j, params).has_value();
  if (!out.in_Xj) return out;
  out.m = m_lattice(fam, j, lambda, xi);
  CompensatedSum acc;
  for (int s = 1; s <= params.floor_eps1(j); ++s) {
    const auto L = L_sj(fam, s, j, lambda, xi, params, cut, quad);
    acc.add(L.value);
    out.terms += L.terms;
    out.quad_error += L.quad_error;
  }
  out.L = acc.value();
  out.value = out.m - out.L;
  return out;
}

std::vector<cplx> E_grid(const KernelFamily& fam, int j, double lambda, std::int64_t N,
                         const ArcParams& params, const CutoffSpec& cut,
                         const QuadratureSpec& quad, double* quad_error) {
  if (quad_error) *quad_error = 0.0;
  if (!in_Xj(lambda, j, params)) {
    long double total = 1.0L;
    for (int k = 0; k < fam.n; ++k) total *= static_cast<long double>(N);
    return std::vector<cplx>(static_cast<std::size_t>(total));
  }
  auto grid = m_grid(fam, j, lambda, N);
  const std::size_t size = grid.values.size();
  const auto n = static_cast<std::size_t>(fam.n);
  std::vector<cplx> corr(size);
  std::vector<double> qerr(size);
  parallel_for(size, [&](std::size_t idx) {
    std::vector<double> xi(n);
    std::size_t rem = idx;
    for (std::size_t k = n; k-- > 0;) {
      xi[k] = static_cast<double>(rem % static_cast<std::size_t>(N)) / static_cast<double>(N);
      rem /= static_cast<std::size_t>(N);
    }
    CompensatedSum acc;
    for (int s = 1; s <= params.floor_eps1(j); ++s) {
      for (const auto& t : arc_terms(s, j, lambda, xi, params, cut)) {
        const cplx S = complete_weyl_sum(t.pair, fam.d, fam.n).value;
        const auto ph = phi(fam, j, static_cast<double>(t.nu), t.eta, quad);
        acc.add(S * ph.value * t.chi);
        qerr[idx] += std::abs(S) * ph.error_estimate * t.chi;
      }
    }
    corr[idx] = acc.value();
  });
  for (std::size_t idx = 0; idx < size; ++idx) {
    grid.values[idx] -= corr[idx];
    if (quad_error) *quad_error = std::max(*quad_error, qerr[idx]);
  }
  return std::move(grid.values);
}

ScriptLResult script_L(int s, const ReducedRational& alpha, const Multiplier& m,
                       std::span<const double> xi, const CutoffSpec& cut, int d) {
  if (s < 1) throw DomainError("script_L: s must be positive");
  if (s > 30) throw BudgetError("script_L: s too large");
  const int n = static_cast<int>(xi.size());
  const ReducedRational a0 = reduce(alpha.num, alpha.den);
  ScriptLResult out;
  CompensatedSum acc;
  const double rad = cut.chi_s_radius(s);
  for (std::int64_t q = rs_q_lo(s); q < rs_q_hi(s); ++q) {
    if (q % a0.den != 0) continue;
    const std::int64_t a = floor_mod(a0.num * (q / a0.den), q);
    for_each_b_window(xi, q, rad, [&](std::span<const std::int64_t> b) {
      std::int64_t g = std::gcd(a, q);
      for (auto bk : b) g = std::gcd(g, floor_mod(bk, q));
      if (g != 1) return;  // b/q has a smaller joint denominator: not in B_s(alpha)
      const auto eta = offsets(xi, b, q);
      const double c = cut.chi_s(s, eta);
      if (c <= 0.0) return;
      const auto pair = ArcPair::make(a, std::vector<std::int64_t>(b.begin(), b.end()), q);
      acc.add(complete_weyl_sum(pair, d, n).value * m(eta) * c);
      ++out.terms;
    });
  }
  out.value = acc.value();
  return out;
}

ScriptLResult script_L_sharp(int s, const Multiplier& m, std::span<const double> xi,
                             const CutoffSpec& cut) {
  if (s < 1) throw DomainError("script_L_sharp: s must be positive");
  if (s > 30) throw BudgetError("script_L_sharp: s too large");
  ScriptLResult out;
  CompensatedSum acc;
  std::set<std::vector<std::pair<std::int64_t, std::int64_t>>> seen;
  const double rad = cut.chi_tilde_s_radius(s);
  for (std::int64_t q = rs_q_lo(s); q < rs_q_hi(s); ++q) {
    for_each_b_window(xi, q, rad, [&](std::span<const std::int64_t> b) {
      std::vector<std::pair<std::int64_t, std::int64_t>> key;
      for (auto bk : b) {
        const auto r = reduce(bk, q);
        key.emplace_back(r.num, r.den);
      }
      if (!seen.insert(key).second) return;  // same beta from a smaller representative
      const auto eta = offsets(xi, b, q);
      const double c = cut.chi_tilde_s(s, eta);
      if (c <= 0.0) return;
      acc.add(m(eta) * c);
      ++out.terms;
    });
  }
  out.value = acc.value();
  return out;
}

}  // namespace dcl
